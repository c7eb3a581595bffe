#include <doctest.h>

#include "graphplay/prompts.hpp"

using namespace graphplay;

namespace {

KnowledgeGraph graph() {
  KnowledgeGraph g;
  auto add = [&](std::string id, NodeType t, std::string content) {
    KGNode n;
    n.node_id = std::move(id);
    n.type = t;
    n.content = std::move(content);
    g.upsert_node(n);
  };
  add("c", NodeType::kClaim,
      "Sparse routing degrades accuracy on long documents with many large tables and figures.");
  add("k", NodeType::kConcept, "sparse routing");
  add("t", NodeType::kTable, "Accuracy per model.");
  g.upsert_edge({"k", "c", EdgeType::kContradicts, 0.8});
  g.upsert_edge({"c", "t", EdgeType::kReferences, 0.9});
  return g;
}

ReasoningPath two_hop(const KnowledgeGraph& g) {
  ReasoningPath p;
  p.nodes = {"k", "c", "t"};
  p.edges = {*g.find_edge({"k", "c", EdgeType::kContradicts}),
             *g.find_edge({"c", "t", EdgeType::kReferences})};
  p.forward = {true, true};
  return p;
}

}  // namespace

TEST_CASE("dominant edge type and template rendering") {
  auto g = graph();
  auto p = two_hop(g);
  CHECK(dominant_edge_type(p) == EdgeType::kContradicts);
  auto q = render_template(TemplateSet{}, p, g, DifficultyLevel::kCausal, "routed | accuracy");
  CHECK(q == "Explain the reasoning: [2-hop chain: Contradicts -> References] "
             "Which table contradicts 'sparse routing'? Report the value for routed | accuracy.");
  ReasoningPath one;
  one.nodes = {"c", "t"};
  one.edges = {p.edges[1]};
  one.forward = {true};
  auto q1 = render_template(TemplateSet{}, one, g, DifficultyLevel::kFactual, "");
  CHECK(q1 == "What does the table referenced by 'Sparse routing degrades accuracy on long "
              "documents with many large tables and ...' show?");
}

TEST_CASE("templates load from JSON") {
  auto t = TemplateSet::from_json(
      {{"by_edge_type", {{"Contradicts", "Who disagrees with {start}?"}}}});
  CHECK(t.by_edge_type.at(EdgeType::kContradicts) == "Who disagrees with {start}?");
  CHECK(t.by_edge_type.at(EdgeType::kSupports) == TemplateSet::defaults().at(EdgeType::kSupports));
}

TEST_CASE("proposer prompt carries path and gold, and reads back") {
  auto g = graph();
  auto p = two_hop(g);
  auto prompt = render_proposer_prompt(p, g, "Which table?", DifficultyLevel::kFactual, "64.8");
  CHECK(prompt.find("[node:k] (Concept) sparse routing") != std::string::npos);
  CHECK(prompt.find("--Contradicts-->") != std::string::npos);
  auto view = read_proposer_prompt(prompt);
  REQUIRE(view);
  CHECK(view->template_text == "Which table?");
  CHECK(view->path_ids == std::vector<std::string>{"k", "c", "t"});
  CHECK(view->gold == "64.8");
}

TEST_CASE("solver prompt holds only the question") {
  auto s = render_solver_prompt("What is 2+2?");
  CHECK(read_solver_question(s) == "What is 2+2?");
  CHECK(s.find("node:") == std::string::npos);
  CHECK(repair_instruction().find("could not be parsed") != std::string::npos);
}

TEST_CASE("tolerant proposer parsing") {
  SUBCASE("plain") {
    auto r = parse_proposer_response("QUESTION: Why?\nANSWER: Because.\nPATH: a -> b -> c\n");
    REQUIRE(r);
    CHECK(r->question == "Why?");
    CHECK(r->answer == "Because.");
    CHECK(r->path == std::vector<std::string>{"a", "b", "c"});
  }
  SUBCASE("markdown, lowercase keys, multi-line, sentinels") {
    auto r = parse_proposer_response(
        "Sure!\n**Question:** Which value\nis reported?\n**answer**: 93\npath: [node:a] [node:b]");
    REQUIRE(r);
    CHECK(r->question == "Which value is reported?");
    CHECK(r->answer == "93");
    CHECK(r->path == std::vector<std::string>{"a", "b"});
  }
  SUBCASE("comma and arrow separators") {
    auto r = parse_proposer_response("QUESTION: q\nPATH: a, b → c");
    REQUIRE(r);
    CHECK(r->path == std::vector<std::string>{"a", "b", "c"});
  }
  SUBCASE("missing pieces") {
    CHECK_FALSE(parse_proposer_response("I would rather describe the figure."));
    CHECK_FALSE(parse_proposer_response("QUESTION: q\nANSWER: a\n"));
    CHECK_FALSE(parse_proposer_response("ANSWER: a\nPATH: a -> b"));
  }
}

TEST_CASE("solver parsing") {
  CHECK(parse_solver_response("Thinking...\nANSWER: 64.8\n") == "64.8");
  CHECK(parse_solver_response("  just text  ") == "just text");
  CHECK(parse_solver_response("ANSWER:") == "");
}
