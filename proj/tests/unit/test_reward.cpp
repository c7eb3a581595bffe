#include <doctest.h>

#include <cmath>
#include <random>

#include "golden_tables.hpp"
#include "graphplay/error.hpp"
#include "graphplay/reward.hpp"
#include "rpath_oracle.hpp"

using namespace graphplay;

namespace {

KGNode node(std::string id, std::vector<Fact> facts = {}) {
  KGNode n;
  n.node_id = std::move(id);
  n.content = "x";
  n.facts = std::move(facts);
  return n;
}

}  // namespace

TEST_CASE("answer matching golden table") {
  for (const auto& c : oracle::accuracy_cases()) {
    INFO(c.why << ": '" << c.candidate << "' vs '" << c.gold << "'");
    CHECK(r_answer(c.candidate, c.gold) == doctest::Approx(c.expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(r_answer("x", "   "), InvariantError);
}

TEST_CASE("criteria are reported separately") {
  auto m = match_answer("graph accuracy reached 94", "93 accuracy");
  CHECK(m.containment == 0.0);
  CHECK(m.numeric == 1.0);
  CHECK(m.keyword_overlap == 1.0);
  std::set<std::string> keys{"graph", "routing"};
  CHECK(r_answer("graph", "anything else", 0.05, &keys) == 0.5);
}

TEST_CASE("relative error") {
  CHECK(relative_error(104, 100) == doctest::Approx(0.04));
  CHECK(relative_error(0, 0) == 0.0);
  CHECK(std::isinf(relative_error(1, 0)));
}

TEST_CASE("r_path agrees with the adjacency-matrix oracle on random graphs") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 100; ++round) {
    const int n = 2 + static_cast<int>(rng() % 6);
    std::vector<std::string> ids;
    KnowledgeGraph g;
    for (int i = 0; i < n; ++i) {
      ids.push_back("n" + std::to_string(i));
      g.upsert_node(node(ids.back()));
    }
    std::vector<oracle::EdgeSpec> specs;
    const int m = static_cast<int>(rng() % (n * 2));
    for (int k = 0; k < m; ++k) {
      int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      if (a == b) continue;
      double conf = static_cast<double>(rng() % 101) / 100.0;
      auto type = kAllEdgeTypes[rng() % kEdgeTypeCount];
      g.upsert_edge({ids[a], ids[b], type, conf});
      specs.clear();
      for (const auto& [key, e] : g.edges()) specs.push_back({e.src, e.dst, e.confidence});
    }
    oracle::AdjacencyMatrix adj(ids, specs, g.validity_floor());
    for (int q = 0; q < 20; ++q) {
      std::vector<std::string> declared;
      const int len = static_cast<int>(rng() % 5);
      for (int i = 0; i < len; ++i)
        declared.push_back(rng() % 10 == 0 ? "ghost" : ids[rng() % n]);
      CHECK(r_path(declared, g) == adj.r_path(declared));
    }
  }
}

TEST_CASE("degenerate declarations score zero") {
  KnowledgeGraph g;
  g.upsert_node(node("a"));
  std::vector<std::string> one{"a"}, none;
  CHECK(r_path(one, g) == 0.0);
  CHECK(r_path(none, g) == 0.0);
  CHECK(is_degenerate_declaration(one));
}

TEST_CASE("consistency against path facts") {
  KnowledgeGraph g;
  g.upsert_node(node("t", {Fact::numeric(93.0), Fact::term_fact("accuracy")}));
  g.upsert_node(node("c", {Fact::term_fact("graph")}));
  g.upsert_node(node("far", {Fact::term_fact("latency")}));
  std::vector<std::string> path{"t", "c"};
  // numbers {93 ok, 40 bad}, terms {graph ok, accuracy ok, latency bad}
  CHECK(r_consistency("graph accuracy 93 and latency 40", path, g) == doctest::Approx(0.6));
  CHECK(r_consistency("the of", path, g) == 1.0);
  CHECK(r_consistency("96 accuracy", path, g) == 1.0);  // 3/93 within 0.05
  CHECK(r_consistency("98 accuracy", path, g) == 0.5);  // 5/93 above 0.05
}

TEST_CASE("total reward is the exact weighted sum") {
  RewardWeights w{0.5, 0.3, 0.2};
  CHECK(total_reward(1, 1, 1, w) == doctest::Approx(1.0));
  CHECK(total_reward(0, 1, 1, w) == 0.5);
  CHECK(total_reward(0.4, 0.5, 1.0, w) == doctest::Approx(0.55));
  CHECK_THROWS_AS(total_reward(1.1, 0, 0, w), InvariantError);
  CHECK_THROWS_AS(total_reward(1, 1, 1, RewardWeights{0.5, 0.5, 0.5}), InvariantError);
  auto b = make_breakdown(0.4, 0.5, 1.0, w);
  CHECK(breakdown_from_json(to_json(b)) == b);
}

TEST_CASE("anneal schedule") {
  AnnealSchedule s;
  CHECK(anneal_weights(s, 0) == s.initial);
  CHECK(anneal_weights(s, 29) == s.final_weights);
  CHECK(anneal_weights(s, -3) == s.initial);
  CHECK(anneal_weights(s, 99) == s.final_weights);
  RewardWeights prev = s.initial;
  for (int e = 1; e < 30; ++e) {
    auto w = anneal_weights(s, e);
    CHECK(w.w_a + w.w_p + w.w_c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.w_a <= prev.w_a);
    CHECK(w.w_p >= prev.w_p);
    CHECK(w.w_c >= prev.w_c);
    prev = w;
  }
  auto w14 = anneal_weights(s, 14), w15 = anneal_weights(s, 15);
  CHECK(w14.w_a > 0.4);
  CHECK(w15.w_a < 0.4);
  CHECK(w14.w_p < 0.35);
  CHECK(w15.w_p > 0.35);
  CHECK(w14.w_a == doctest::Approx(0.5 - 0.2 * 14.0 / 29.0));
}
