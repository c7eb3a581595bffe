#include <doctest.h>

#include "graphplay/error.hpp"
#include "graphplay/path_sampler.hpp"

using namespace graphplay;

namespace {

KGNode node(std::string id) {
  KGNode n;
  n.node_id = std::move(id);
  n.content = "x";
  return n;
}

// a -Supports- b -Compares- c -Contains- d
KnowledgeGraph chain() {
  KnowledgeGraph g;
  for (auto id : {"a", "b", "c", "d"}) g.upsert_node(node(id));
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.9});
  g.upsert_edge({"c", "b", EdgeType::kCompares, 0.9});
  g.upsert_edge({"c", "d", EdgeType::kContains, 1.0});
  return g;
}

}  // namespace

TEST_CASE("default edge weights") {
  auto w = EdgeTypeWeights::defaults();
  CHECK(w[EdgeType::kSameConcept] == 1.00);
  CHECK(w[EdgeType::kContradicts] == 0.95);
  CHECK(w[EdgeType::kCompares] == 0.90);
  CHECK(w[EdgeType::kDerivesFrom] == 0.85);
  CHECK(w[EdgeType::kQuantifies] == 0.80);
  CHECK(w[EdgeType::kHasCaption] == 0.50);
  CHECK(w[EdgeType::kContains] == 0.30);
  double sum = 0;
  for (auto t : kAllEdgeTypes) sum += w[t];
  CHECK(sum == doctest::Approx(8.75));
  EdgeTypeWeights zero;
  CHECK_THROWS_AS(zero.validate(), ConfigError);
  w.set(EdgeType::kContains, -0.1);
  CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("schedules") {
  HopSchedule s;
  CHECK(s.max_hops_at(0) == 1);
  CHECK(s.max_hops_at(9) == 1);
  CHECK(s.max_hops_at(10) == 2);
  CHECK(s.max_hops_at(19) == 2);
  CHECK(s.max_hops_at(20) == 3);
  CHECK(s.max_hops_at(29) == 3);
  CHECK(s.difficulty_at(7) == DifficultyLevel::kVQA);
  CHECK(s.difficulty_at(8) == DifficultyLevel::kFactual);
  CHECK(s.difficulty_at(15) == DifficultyLevel::kCausal);
  CHECK(s.difficulty_at(23) == DifficultyLevel::kInstructionFollowing);
  s.hops_from_epoch = {{0, 2}, {5, 1}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.hops_from_epoch = {{1, 1}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(parse_difficulty(to_string(DifficultyLevel::kCausal)) == DifficultyLevel::kCausal);
}

TEST_CASE("effective weights divide by floored accuracy") {
  auto base = EdgeTypeWeights::defaults();
  CurriculumState cur;
  cur.per_type_accuracy = {{EdgeType::kSupports, 0.5}, {EdgeType::kContains, 0.0}};
  auto w = effective_weights(base, cur);
  CHECK(w[EdgeType::kSupports] == doctest::Approx(0.9 / 0.5));
  CHECK(w[EdgeType::kContains] == doctest::Approx(0.3 / 0.1));
  CHECK(w[EdgeType::kCompares] == 0.9);
}

TEST_CASE("advance_curriculum follows the schedule") {
  HopSchedule s;
  auto cur = CurriculumState::initial(s);
  for (int e = 0; e < 10; ++e) cur = advance_curriculum(cur, {{EdgeType::kSupports, 0.4}}, s);
  CHECK(cur.epoch == 10);
  CHECK(cur.max_hops == 2);
  CHECK(cur.difficulty == DifficultyLevel::kFactual);
  CHECK(cur.per_type_accuracy.at(EdgeType::kSupports) == 0.4);
}

TEST_CASE("walks respect max hops, validity and visited nodes") {
  auto g = chain();
  auto w = EdgeTypeWeights::defaults();
  CurriculumState cur;
  cur.max_hops = 3;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    auto p = sample_path(g, cur, w, rng);
    REQUIRE(p.nodes.size() == p.edges.size() + 1);
    CHECK(p.hops() >= 1);
    CHECK(p.hops() <= 3);
    std::set<std::string> seen(p.nodes.begin(), p.nodes.end());
    CHECK(seen.size() == p.nodes.size());
    for (std::size_t k = 0; k < p.hops(); ++k) {
      const auto& e = p.edges[k];
      CHECK(g.find_edge(e.key()));
      const auto& from = p.nodes[k];
      const auto& to = p.nodes[k + 1];
      CHECK((p.forward[k] ? (e.src == from && e.dst == to) : (e.dst == from && e.src == to)));
    }
  }
  cur.max_hops = 1;
  CHECK(sample_path(g, cur, w, rng).hops() == 1);
}

TEST_CASE("same seed, same path; JSON round-trip") {
  auto g = chain();
  CurriculumState cur;
  cur.max_hops = 3;
  std::mt19937_64 r1(42), r2(42);
  auto p1 = sample_path(g, cur, EdgeTypeWeights::defaults(), r1);
  auto p2 = sample_path(g, cur, EdgeTypeWeights::defaults(), r2);
  CHECK(p1 == p2);
  CHECK(path_from_json(to_json(p1)) == p1);
}

TEST_CASE("no walkable edge") {
  KnowledgeGraph g;
  g.upsert_node(node("a"));
  g.upsert_node(node("b"));
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(sample_path(g, {}, EdgeTypeWeights::defaults(), rng), NoPathAvailable);
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.1});  // below the floor
  CHECK_THROWS_AS(sample_path(g, {}, EdgeTypeWeights::defaults(), rng), NoPathAvailable);
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.9});
  std::set<EdgeKey> excluded{{"a", "b", EdgeType::kSupports}};
  SamplerOptions opt{&excluded};
  CHECK_THROWS_AS(sample_path(g, {}, EdgeTypeWeights::defaults(), rng, opt), NoPathAvailable);
  auto w = EdgeTypeWeights::defaults();
  w.set(EdgeType::kSupports, 0.0);
  CHECK_THROWS_AS(sample_path(g, {}, w, rng), NoPathAvailable);
}

TEST_CASE("first-step frequencies follow the weights") {
  KnowledgeGraph g;
  g.upsert_node(node("hub"));
  g.upsert_node(node("x"));
  g.upsert_node(node("y"));
  g.upsert_edge({"hub", "x", EdgeType::kSameConcept, 1.0});
  g.upsert_edge({"hub", "y", EdgeType::kContains, 1.0});
  std::mt19937_64 rng(9);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    hits += draw_step(g, "hub", {"hub"}, EdgeTypeWeights::defaults(), rng)->node->node_id == "x";
  CHECK(static_cast<double>(hits) / n == doctest::Approx(1.0 / 1.3).epsilon(0.03));
  CHECK_FALSE(draw_step(g, "hub", {"hub", "x", "y"}, EdgeTypeWeights::defaults(), rng));
}
