#include <doctest.h>

#include "graphplay/error.hpp"
#include "graphplay/refine.hpp"
#include "test_support.hpp"

using namespace graphplay;
using nlohmann::json;

namespace {

KGNode node(std::string id, std::string content = "x", NodeType t = NodeType::kTextBlock,
            std::string doc = "d") {
  KGNode n;
  n.node_id = std::move(id);
  n.type = t;
  n.doc_id = std::move(doc);
  n.content = std::move(content);
  return n;
}

// An ok episode over `path` whose single candidate earns (ra, rp, rc).
QAEpisode episode(const KnowledgeGraph& g, std::vector<std::string> path,
                  std::vector<std::string> declared, double ra, double rp, double rc) {
  QAEpisode e;
  e.proposed.path.nodes = path;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    for (const auto& [k, edge] : g.edges()) {
      if ((k.src == path[i] && k.dst == path[i + 1]) ||
          (k.dst == path[i] && k.src == path[i + 1])) {
        e.proposed.path.edges.push_back(edge);
        e.proposed.path.forward.push_back(k.src == path[i]);
        break;
      }
    }
  }
  e.proposed.declared_path = std::move(declared);
  e.rewards = {make_breakdown(ra, rp, rc, RewardWeights{})};
  e.answers = {"a"};
  return e;
}

}  // namespace

TEST_CASE("three failing episodes prune a 0.28 edge") {
  KnowledgeGraph g;
  g.upsert_node(node("a"));
  g.upsert_node(node("b"));
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.28});
  std::vector<QAEpisode> eps(3, episode(g, {"a", "b"}, {"a", "b"}, 0, 1, 1));
  RefineConfig cfg;
  auto batch = build_refinement(eps, g, cfg, nullptr, nullptr, 0);
  REQUIRE(batch.removed.size() == 1);
  CHECK(batch.removed[0].hits == 3);
  CHECK(batch.removed[0].after == doctest::Approx(0.13));
  CHECK(batch.penalized.empty());
  auto next = apply_batch(g, batch);
  CHECK(next.edge_count() == 0);
  CHECK(next.version() == 1);
  CHECK(g.edge_count() == 1);
}

TEST_CASE("a single failure penalizes without removing") {
  KnowledgeGraph g;
  g.upsert_node(node("a"));
  g.upsert_node(node("b"));
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.9});
  std::vector<QAEpisode> eps{episode(g, {"a", "b"}, {"a", "b"}, 0, 1, 1),
                             episode(g, {"a", "b"}, {"a", "b"}, 1, 1, 1)};
  auto batch = prune_spurious(eps, g, RefineConfig{});
  REQUIRE(batch.penalized.size() == 1);
  CHECK(batch.penalized[0].after == doctest::Approx(0.85));
  auto next = apply_batch(g, build_refinement(eps, g, RefineConfig{}, nullptr, nullptr, 0));
  CHECK(next.find_edge({"a", "b", EdgeType::kSupports})->confidence == doctest::Approx(0.85));
}

TEST_CASE("high-reward episodes add the missing declared edge once") {
  KnowledgeGraph g;
  for (auto id : {"a", "b", "c"}) g.upsert_node(node(id));
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.9});
  auto good = episode(g, {"a", "b"}, {"a", "b", "c"}, 1, 0.5, 1);  // total 0.85
  auto twice = episode(g, {"a", "b"}, {"c", "b"}, 1, 0.5, 1);
  auto low = episode(g, {"a", "b"}, {"a", "c"}, 1, 0, 0);           // total 0.5
  std::vector<QAEpisode> eps{good, twice, low};
  auto added = detect_missing(eps, g, RefineConfig{}, nullptr);
  REQUIRE(added.size() == 1);
  CHECK(added[0].src == "b");
  CHECK(added[0].dst == "c");
  CHECK(added[0].type == EdgeType::kReferences);
  CHECK(added[0].confidence == 0.5);

  ScriptedClassifier cls;
  cls.set("b", "c", {RelationLabel::kCompares, 0.9});
  added = detect_missing(eps, g, RefineConfig{}, &cls);
  CHECK(added[0].type == EdgeType::kCompares);
  CHECK(added[0].confidence == 0.5);

  auto next = apply_batch(g, build_refinement(eps, g, RefineConfig{}, nullptr, nullptr, 0));
  CHECK(next.edge_count() == 2);
  CHECK(next.has_valid_edge("b", "c"));
}

TEST_CASE("declared ids outside the graph are ignored") {
  KnowledgeGraph g;
  g.upsert_node(node("a"));
  std::vector<QAEpisode> eps{episode(g, {"a"}, {"a", "ghost"}, 1, 0, 1)};
  CHECK(detect_missing(eps, g, RefineConfig{}, nullptr).empty());
}

TEST_CASE("stale batches are rejected and leave the graph untouched") {
  KnowledgeGraph g;
  g.upsert_node(node("a"));
  g.upsert_node(node("b"));
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.28});
  std::vector<QAEpisode> eps(3, episode(g, {"a", "b"}, {"a", "b"}, 0, 1, 1));
  auto batch = build_refinement(eps, g, RefineConfig{}, nullptr, nullptr, 0);
  auto next = apply_batch(g, batch);
  const auto snapshot = next;
  CHECK_THROWS_AS(apply_batch(next, batch), StaleBatchError);
  CHECK(next == snapshot);
  CHECK(next.version() == 1);
}

TEST_CASE("merging same-type near duplicates") {
  KnowledgeGraph g;
  g.upsert_node(node("k2", "evidence graph", NodeType::kConcept));
  g.upsert_node(node("k1", "evidence graph", NodeType::kConcept));
  g.upsert_node(node("k3", "evidence graph", NodeType::kConcept, "other"));
  g.upsert_node(node("t", "evidence graph", NodeType::kTextBlock));
  g.upsert_node(node("u", "unrelated words"));
  g.upsert_edge({"u", "k2", EdgeType::kDefines, 0.6});
  g.upsert_edge({"u", "k1", EdgeType::kDefines, 0.4});
  HashingEmbedder emb;
  auto merges = merge_candidates(g, emb, 0.88);
  REQUIRE(merges.size() == 1);
  CHECK(merges[0] == std::pair<std::string, std::string>{"k2", "k1"});

  RefinementBatch b;
  b.merged = merges;
  auto next = apply_batch(g, b);
  CHECK_FALSE(next.contains_node("k2"));
  CHECK(next.edge_count() == 1);
  CHECK(next.find_edge({"u", "k1", EdgeType::kDefines})->confidence == 0.6);
}

TEST_CASE("audit log and JSON") {
  RefinementBatch b;
  b.epoch = 3;
  b.added.push_back({"a", "b", EdgeType::kReferences, 0.5});
  b.removed.push_back({{"c", "d", EdgeType::kSupports}, 3, 0.28, 0.13});
  auto j = to_json(b);
  CHECK(j["epoch"] == 3);
  CHECK(j["added"].size() == 1);
  auto dir = testsupport::scratch("refine_log");
  append_audit_log(dir / "log.jsonl", b);
  append_audit_log(dir / "log.jsonl", b);
  auto text = testsupport::read_file(dir / "log.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("config validation") {
  RefineConfig c;
  c.tau_prune = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
