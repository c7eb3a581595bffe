#include <doctest.h>

#include <atomic>

#include "graphplay/classifier.hpp"
#include "graphplay/error.hpp"
#include "test_support.hpp"

using namespace graphplay;
using nlohmann::json;

namespace {

KGNode node(std::string id, NodeType t, std::string content) {
  KGNode n;
  n.node_id = std::move(id);
  n.type = t;
  n.content = std::move(content);
  return n;
}

}  // namespace

TEST_CASE("labels map onto semantic edge types") {
  CHECK(to_edge_type(RelationLabel::kContradicts) == EdgeType::kContradicts);
  CHECK_FALSE(to_edge_type(RelationLabel::kNone));
  CHECK(parse_relation_label("DerivesFrom") == RelationLabel::kDerivesFrom);
  CHECK_FALSE(parse_relation_label("Defines"));
}

TEST_CASE("cue-word rules") {
  CueWordClassifier c(0.7);
  auto claim = node("c", NodeType::kClaim, "Our method improves accuracy.");
  auto fig = node("f", NodeType::kFigure, "Accuracy curve.");
  auto eq = node("e", NodeType::kEquation, "r = a + b");
  auto neg = node("n", NodeType::kClaim, "Routing degrades accuracy.");
  auto cmp = node("m", NodeType::kTextBlock, "It outperforms the baseline.");
  CHECK(c.classify(claim, fig).label == RelationLabel::kIllustrates);
  CHECK(c.classify(claim, eq).label == RelationLabel::kDerivesFrom);
  CHECK(c.classify(claim, neg).label == RelationLabel::kContradicts);
  CHECK(c.classify(claim, cmp).label == RelationLabel::kCompares);
  CHECK(c.classify(cmp, claim).confidence == 0.7);
  CHECK(c.classify(claim, claim).label == RelationLabel::kSupports);
}

TEST_CASE("scripted table with fallback") {
  auto s = ScriptedClassifier::from_json(json::parse(R"({
    "fallback": "none",
    "pairs": [{"src": "a", "dst": "b", "label": "Compares", "confidence": 0.9}]})"));
  auto a = node("a", NodeType::kClaim, "x"), b = node("b", NodeType::kClaim, "y");
  auto v = s->classify(a, b);
  CHECK(v.label == RelationLabel::kCompares);
  CHECK(v.confidence == 0.9);
  CHECK(s->classify(b, a).label == RelationLabel::kNone);
  CHECK(s->calls() == 2);
  CHECK_THROWS_AS(ScriptedClassifier::from_json(json{{"fallback", "oracle"}}), ConfigError);
  CHECK_THROWS_AS(ScriptedClassifier::from_json(json::parse(
                      R"({"pairs":[{"src":"a","dst":"b","label":"Likes"}]})")),
                  ConfigError);
}

TEST_CASE("/v1/classify-relation contract") {
  testsupport::LocalServer srv;
  std::atomic<int> calls{0};
  json last;
  json reply = {{"label", "Supports"}, {"confidence", 0.83}};
  int fail_first = 0;
  srv.server.Post("/v1/classify-relation",
                  [&](const httplib::Request& req, httplib::Response& res) {
                    ++calls;
                    if (calls <= fail_first) {
                      res.status = 503;
                      return;
                    }
                    last = json::parse(req.body);
                    res.set_content(reply.dump(), "application/json");
                  });
  srv.start();
  auto a = node("a", NodeType::kClaim, "source text");
  auto b = node("b", NodeType::kTextBlock, "target text");

  SUBCASE("request and response shape") {
    HttpClassifier c(srv.url());
    auto v = c.classify(a, b);
    CHECK(v.label == RelationLabel::kSupports);
    CHECK(v.confidence == doctest::Approx(0.83));
    CHECK(last["src_text"] == "source text");
    CHECK(last["dst_text"] == "target text");
    CHECK(last["labels"] == json::array({"Illustrates", "Supports", "Contradicts",
                                         "DerivesFrom", "Compares", "None"}));
  }
  SUBCASE("transient failures are retried") {
    fail_first = 2;
    HttpClassifier c(srv.url(), 3);
    CHECK(c.classify(a, b).label == RelationLabel::kSupports);
    CHECK(calls == 3);
  }
  SUBCASE("retries are bounded") {
    fail_first = 5;
    HttpClassifier c(srv.url(), 2);
    CHECK_THROWS_AS(c.classify(a, b), EndpointError);
    CHECK(calls == 2);
  }
  SUBCASE("label outside the closed set") {
    reply = {{"label", "Defines"}, {"confidence", 0.5}};
    CHECK_THROWS_AS(HttpClassifier(srv.url()).classify(a, b), ProtocolError);
  }
  SUBCASE("confidence outside [0,1]") {
    reply = {{"label", "Supports"}, {"confidence", 1.5}};
    CHECK_THROWS_AS(HttpClassifier(srv.url()).classify(a, b), ProtocolError);
  }
}
