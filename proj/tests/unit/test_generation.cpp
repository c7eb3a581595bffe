#include <doctest.h>

#include <atomic>
#include <thread>

#include "graphplay/error.hpp"
#include "graphplay/generation.hpp"
#include "graphplay/prompts.hpp"
#include "test_support.hpp"

using namespace graphplay;
using nlohmann::json;

namespace {

GenerationRequest solver_req(std::string question, int n = 1) {
  GenerationRequest r;
  r.role = Role::kSolver;
  r.prompt = render_solver_prompt(question);
  r.n = n;
  return r;
}

std::string proposer_prompt(const std::string& tmpl, const std::string& gold) {
  KnowledgeGraph g;
  KGNode a, b;
  a.node_id = "a";
  a.content = "alpha";
  b.node_id = "b";
  b.content = "beta";
  g.upsert_node(a);
  g.upsert_node(b);
  g.upsert_edge({"a", "b", EdgeType::kSupports, 0.9});
  ReasoningPath p;
  p.nodes = {"a", "b"};
  p.edges = {*g.find_edge({"a", "b", EdgeType::kSupports})};
  p.forward = {true};
  return render_proposer_prompt(p, g, tmpl, DifficultyLevel::kFactual, gold);
}

}  // namespace

TEST_CASE("request JSON round-trip") {
  GenerationRequest r;
  r.role = Role::kProposer;
  r.prompt = "p";
  r.image_refs = {"img.png"};
  r.n = 3;
  r.max_tokens = 128;
  r.temperature = 0.2;
  r.seed = 99;
  auto j = r.to_json();
  CHECK(j["role"] == "proposer");
  CHECK(j["images"] == json::array({"img.png"}));
  auto back = GenerationRequest::from_json(j);
  CHECK(back.n == 3);
  CHECK(back.seed == 99);
  CHECK(back.image_refs == r.image_refs);
  CHECK(parse_role("classifier") == Role::kClassifier);
}

TEST_CASE("faithful proposer feeds echo_gold solver") {
  ScriptedModel m;
  GenerationRequest p;
  p.role = Role::kProposer;
  p.prompt = proposer_prompt("What supports alpha?", "beta");
  auto reply = m.generate(p);
  REQUIRE(reply.size() == 1);
  auto parsed = parse_proposer_response(reply[0]);
  REQUIRE(parsed);
  CHECK(parsed->question == "Q0. What supports alpha?");
  CHECK(parsed->answer == "beta");
  CHECK(parsed->path == std::vector<std::string>{"a", "b"});
  auto answers = m.generate(solver_req(parsed->question, 4));
  CHECK(answers == std::vector<std::string>(4, "ANSWER: beta"));
  CHECK(m.calls(Role::kSolver) == 1);
  CHECK(m.requests().size() == 2);
}

TEST_CASE("solver behaviors") {
  auto m = ScriptedModel::from_json(json::parse(
      R"({"solver": {"behavior": "mixed"}, "answers": {"q?": "42"}})"));
  CHECK(m->generate(solver_req("q?", 4)) ==
        std::vector<std::string>{"ANSWER: 42", "ANSWER: xyzzy", "ANSWER: 42", "ANSWER: xyzzy"});
  m->set_behavior(Role::kSolver, {"empty", {}});
  CHECK(m->generate(solver_req("q?"))[0] == "ANSWER:");
  m->set_behavior(Role::kSolver, {"fixed", {"ANSWER: a", "ANSWER: b"}});
  CHECK(m->generate(solver_req("q?", 3)) ==
        std::vector<std::string>{"ANSWER: a", "ANSWER: b", "ANSWER: a"});  // ordinal 2
  CHECK_THROWS_AS(m->set_behavior(Role::kSolver, {"psychic", {}}), ConfigError);
  CHECK_THROWS_AS(m->set_behavior(Role::kSolver, {"fixed", {}}), ConfigError);
}

TEST_CASE("repairable proposer recovers after the repair instruction") {
  ScriptedModel m;
  m.set_behavior(Role::kProposer, {"repairable", {}});
  GenerationRequest p;
  p.role = Role::kProposer;
  p.prompt = proposer_prompt("T?", "g");
  CHECK_FALSE(parse_proposer_response(m.generate(p)[0]));
  p.prompt += repair_instruction();
  CHECK(parse_proposer_response(m.generate(p)[0]));
}

TEST_CASE("rules: first match wins, by ordinal, hash or substring") {
  auto m = ScriptedModel::from_json(json::parse(R"({
    "solver": {"behavior": "wrong"},
    "rules": [
      {"role": "solver", "ordinal": 1, "responses": ["ANSWER: second"]},
      {"role": "solver", "contains": "caption", "responses": ["ANSWER: c1", "ANSWER: c2"]}
    ]})"));
  CHECK(m->generate(solver_req("the caption of it", 3)) ==
        std::vector<std::string>{"ANSWER: c1", "ANSWER: c2", "ANSWER: c1"});
  CHECK(m->generate(solver_req("the caption of it"))[0] == "ANSWER: second");
  CHECK(m->generate(solver_req("other"))[0] == "ANSWER: xyzzy");

  auto prompt = render_solver_prompt("hashed?");
  ScriptedModel h;
  h.add_rule({Role::kSolver, std::nullopt, ScriptedModel::prompt_hash(prompt), std::nullopt,
              {"ANSWER: by hash"}});
  CHECK(h.generate(solver_req("hashed?"))[0] == "ANSWER: by hash");
  CHECK_THROWS_AS(ScriptedModel::from_json(json::parse(
                      R"({"rules":[{"role":"oracle","responses":["x"]}]})")),
                  SchemaError);
}

TEST_CASE("scenario fixtures load") {
  for (auto f : {"echo_gold", "mixed", "wrong", "empty"})
    CHECK(ScriptedModel::from_file(testsupport::fixture(std::string("scenarios/") + f + ".json")));
  CHECK_THROWS_AS(ScriptedModel::from_file("/nonexistent.json"), NotFoundError);
}

TEST_CASE("/v1/generate contract") {
  testsupport::LocalServer srv;
  json last;
  std::string mode = "ok";
  std::atomic<int> active{0}, peak{0};
  srv.server.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    int now = ++active;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {}
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    last = json::parse(req.body);
    json cands = json::array();
    for (int i = 0; i < last["n"].get<int>(); ++i) cands.push_back("ANSWER: " + std::to_string(i));
    if (mode == "short") cands.erase(cands.begin());
    if (mode == "bad") cands = json::array({1, 2});
    if (mode == "500") res.status = 500;
    else if (mode == "garbage") res.set_content("not json", "application/json");
    else res.set_content(json{{"candidates", cands}}.dump(), "application/json");
    --active;
  });
  srv.start();

  SUBCASE("request fields and n candidates") {
    HttpGenerationModel m(srv.url());
    GenerationRequest r = solver_req("q", 2);
    r.image_refs = {"x.png"};
    r.seed = 7;
    auto out = m.generate(r);
    CHECK(out == std::vector<std::string>{"ANSWER: 0", "ANSWER: 1"});
    CHECK(last["role"] == "solver");
    CHECK(last["prompt"] == r.prompt);
    CHECK(last["images"] == json::array({"x.png"}));
    CHECK(last["n"] == 2);
    CHECK(last["max_tokens"] == 256);
    CHECK(last["seed"] == 7);
  }
  SUBCASE("wrong candidate count") {
    mode = "short";
    CHECK_THROWS_AS(HttpGenerationModel(srv.url()).generate(solver_req("q", 2)), ProtocolError);
  }
  SUBCASE("non-string candidates") {
    mode = "bad";
    CHECK_THROWS_AS(HttpGenerationModel(srv.url()).generate(solver_req("q", 2)), ProtocolError);
  }
  SUBCASE("unparsable body") {
    mode = "garbage";
    CHECK_THROWS_AS(HttpGenerationModel(srv.url()).generate(solver_req("q")), ProtocolError);
  }
  SUBCASE("server error") {
    mode = "500";
    CHECK_THROWS_AS(HttpGenerationModel(srv.url()).generate(solver_req("q")), EndpointError);
  }
  SUBCASE("in-flight bound") {
    HttpGenerationModel m(srv.url(), 2);
    std::vector<std::thread> ts;
    for (int i = 0; i < 6; ++i) ts.emplace_back([&] { m.generate(solver_req("q")); });
    for (auto& t : ts) t.join();
    CHECK(peak.load() <= 2);
  }
}

TEST_CASE("unreachable generation endpoint") {
  HttpGenerationModel m("http://127.0.0.1:1", 1, 2);
  CHECK_THROWS_AS(m.generate(solver_req("q")), EndpointError);
}
