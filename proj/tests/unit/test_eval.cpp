#include <doctest.h>

#include "golden_tables.hpp"
#include "graphplay/construct.hpp"
#include "graphplay/error.hpp"
#include "graphplay/eval.hpp"
#include "test_support.hpp"

using namespace graphplay;
using nlohmann::json;

namespace {

KGNode node(std::string id, NodeType t, std::string content, std::string label = {}) {
  KGNode n;
  n.node_id = std::move(id);
  n.type = t;
  n.content = std::move(content);
  if (!label.empty()) n.attrs["label"] = std::move(label);
  return n;
}

KnowledgeGraph alias_graph() {
  KnowledgeGraph g;
  g.upsert_node(node("t1", NodeType::kTable, "Scores.", "Table 1"));
  g.upsert_node(node("t10", NodeType::kTable, "More scores.", "Table 10"));
  g.upsert_node(node("k", NodeType::kConcept, "evidence graph"));
  g.upsert_node(node("f", NodeType::kFigure, "A plot.", "Figure 2"));
  return g;
}

}  // namespace

TEST_CASE("accuracy is the answer reward") {
  for (const auto& c : oracle::accuracy_cases())
    CHECK(accuracy(c.candidate, c.gold) == doctest::Approx(c.expected).epsilon(1e-12));
}

TEST_CASE("path F1 golden table") {
  for (const auto& c : oracle::path_f1_cases()) {
    INFO(c.why);
    std::set<NodePair> m;
    for (const auto& [a, b] : c.model_pairs) m.insert(unordered_pair(a, b));
    CHECK(path_f1(m, pairs_from_path(c.kg_path)) == doctest::Approx(c.expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(path_f1({}, {}), InvariantError);
}

TEST_CASE("model pairs from sentinels and aliases") {
  auto g = alias_graph();
  auto s = extract_model_pairs("From [node:t1] to [node:k] via [node:ghost] then [node:f]", g);
  CHECK(s == std::set<NodePair>{unordered_pair("t1", "k"), unordered_pair("k", "f")});
  auto a = extract_model_pairs("Table 1 backs the Evidence Graph, unlike Figure 2.", g);
  CHECK(a == std::set<NodePair>{unordered_pair("t1", "k"), unordered_pair("k", "f")});
  CHECK(extract_model_pairs("Table 10 alone", g).empty());
  std::vector<std::string> kg{"t1", "k", "f"};
  CHECK(path_f1(a, pairs_from_path(kg)) == 1.0);
}

TEST_CASE("hallucination golden table") {
  for (const auto& c : oracle::hallucination_cases()) {
    INFO(c.why << ": " << c.candidate);
    std::vector<Fact> facts;
    for (double v : c.numeric_facts) facts.push_back(Fact::numeric(v));
    for (const auto& t : c.term_facts) facts.push_back(Fact::term_fact(t));
    auto h = hallucination_rate(c.candidate, facts, 0.05);
    CHECK(h.halnum == doctest::Approx(c.halnum));
    CHECK(h.halfact == doctest::Approx(c.halfact));
    CHECK(h.rate == doctest::Approx(c.rate));
  }
}

TEST_CASE("dataset validation lists every bad line") {
  const std::string data =
      R"({"id":"a","question":"q?","gold_answer":"x","gold_path":["n1","n2"],"hop_level":1})" "\n"
      R"({"id":"b","question":"q?","gold_answer":"x","gold_path":["n1","n2"],"hop_level":2})" "\n"
      R"({"id":"c","question":"q?","gold_answer":"  ","hop_level":1})" "\n"
      "\n"
      R"({"id":"a","question":"q?","gold_answer":"x","hop_level":1})" "\n"
      R"({"id":"d","question":"q?","gold_answer":"x","hop_level":4})" "\n"
      "not json\n"
      R"({"id":"e","question":"q?","gold_answer":"x","hop_level":3,"question_type":"Synthesis"})" "\n";
  auto d = parse_dataset(data);
  CHECK(d.items.size() == 2);
  REQUIRE(d.errors.size() == 5);
  CHECK(d.errors[0].rfind("line 2 (b):", 0) == 0);
  CHECK(d.errors[2].find("duplicate") != std::string::npos);
  CHECK(d.errors[4].rfind("line 7", 0) == 0);
  CHECK(d.items[1].question_type == QuestionType::kSynthesis);

  auto dir = testsupport::scratch("dataset");
  write_dataset(dir / "d.jsonl", d.items);
  auto back = load_dataset(dir / "d.jsonl");
  CHECK(back.errors.empty());
  CHECK(back.items == d.items);
  CHECK_THROWS_AS(load_dataset(dir / "missing.jsonl"), NotFoundError);
}

TEST_CASE("evaluation aggregates per hop") {
  auto g = alias_graph();
  g.upsert_node(node("n", NodeType::kTextBlock, "x"));
  KGNode tab = g.node("t1");
  tab.facts = {Fact::numeric(93.0), Fact::term_fact("graph")};
  g.upsert_node(tab);
  std::vector<QAItem> items = {
      {"i1", "What is the score?", "93", {"t1", "k"}, 1, QuestionType::kFactual, {}},
      {"i2", "And the other?", "evidence graph", {"t1", "k", "f"}, 2,
       QuestionType::kSynthesis, {}},
  };
  ScriptedModel m;
  m.set_behavior(Role::kSolver, {"fixed", {"ANSWER: graph 93"}});
  auto r = evaluate_dataset(items, m, g);
  CHECK(r.count == 2);
  CHECK(r.per_hop.at(1).accuracy == 1.0);    // numeric match
  CHECK(r.per_hop.at(2).accuracy == 0.5);    // keyword 1 of 2
  CHECK(r.accuracy == doctest::Approx(0.75));
  CHECK(r.path_f1_items == 2);
  CHECK(r.path_f1 == 0.0);                   // no sentinels or aliases in the answer
  CHECK(r.hallucination_rate == 0.0);        // 93 and "graph" are both facts
  auto table = to_table(r);
  CHECK(table.find("1-hop") == 0);
  CHECK(table.find("100.00") != std::string::npos);
  CHECK(table.find("50.00") != std::string::npos);
  CHECK(to_json(r)["items"].size() == 2);
  CHECK(m.requests()[0].temperature == 0.0);
}

TEST_CASE("synthetic datasets have exact hop counts") {
  auto doc = load_document(testsupport::fixture("corpus/paperA.json"));
  HashingEmbedder e;
  CueWordClassifier c;
  ConstructionReport rep;
  auto g = build_document_graph(doc, e, c, ConstructConfig{}, rep);
  ScriptedModel m;
  auto items = generate_dataset(g, m, 3, 17);
  CHECK(items.size() == 9);
  for (const auto& it : items) {
    CHECK(static_cast<int>(it.gold_path.size()) == it.hop_level + 1);
    CHECK_FALSE(it.gold_answer.empty());
  }
  CHECK(items.front().id == "h1-000");
  ScriptedModel m2;
  CHECK(generate_dataset(g, m2, 3, 17) == items);
}
