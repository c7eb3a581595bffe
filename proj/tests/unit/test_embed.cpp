#include <doctest.h>

#include <atomic>
#include <cmath>

#include <nlohmann/json.hpp>

#include "graphplay/embed.hpp"
#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"
#include "test_support.hpp"

using namespace graphplay;
using nlohmann::json;

TEST_CASE("cosine") {
  CHECK(cosine({{1, 0}}, {{0, 1}}) == doctest::Approx(0.0));
  CHECK(cosine({{1, 2}}, {{2, 4}}) == doctest::Approx(1.0));
  CHECK(cosine({{3, 4}}, {{4, 3}}) == doctest::Approx(24.0 / 25.0));
  CHECK_THROWS_AS(cosine({{1, 0}}, {{1, 0, 0}}), InvariantError);
  CHECK_THROWS_AS(cosine({{0, 0}}, {{1, 0}}), InvariantError);
}

TEST_CASE("hashing embedder matches a hand-built bag of words") {
  const std::size_t dim = 16;
  HashingEmbedder e(dim);
  auto v = e.embed_one("The graph, the reward and the graph");
  std::vector<double> expect(dim, 0.0);
  expect[fnv1a64("graph") % dim] += 2.0;
  expect[fnv1a64("reward") % dim] += 1.0;
  double n = 0;
  for (double x : expect) n += x * x;
  n = std::sqrt(n);
  REQUIRE(v.dim() == dim);
  for (std::size_t i = 0; i < dim; ++i) CHECK(v.values[i] == doctest::Approx(expect[i] / n));
  CHECK(e.embed_one("the of and").norm() == 0.0);
  CHECK(e.embed_one("Graph reward") == e.embed_one("reward GRAPH"));
  std::vector<std::string> none;
  CHECK_THROWS_AS(e.embed(none), InvariantError);
}

TEST_CASE("provider config") {
  EmbedProviderConfig c;
  c.mode = EmbedProviderConfig::Mode::kHttpEndpoint;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.mode = EmbedProviderConfig::Mode::kDeterministicTest;
  c.dim = 8;
  CHECK(make_embedder(c)->dim() == 8);
}

TEST_CASE("/v1/embed contract") {
  testsupport::LocalServer srv;
  std::atomic<int> calls{0};
  json last_body;
  std::string mode = "ok";
  srv.server.Post("/v1/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    last_body = json::parse(req.body);
    if (mode == "500") {
      res.status = 500;
      return;
    }
    json vectors = json::array();
    for (std::size_t i = 0; i < last_body["texts"].size(); ++i)
      vectors.push_back(mode == "short" ? json::array({1.0}) : json::array({3.0, 4.0, 0.0}));
    if (mode == "missing") vectors = json::array();
    res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
  });
  srv.start();

  EmbedProviderConfig c;
  c.mode = EmbedProviderConfig::Mode::kHttpEndpoint;
  c.endpoint_url = srv.url();
  c.dim = 3;

  SUBCASE("normalizes and memoizes") {
    auto e = make_embedder(c);
    std::vector<std::string> texts{"alpha", "beta"};
    auto v = e->embed(texts);
    REQUIRE(v.size() == 2);
    CHECK(v[0].values[0] == doctest::Approx(0.6));
    CHECK(v[0].values[1] == doctest::Approx(0.8));
    CHECK(last_body["texts"] == json::array({"alpha", "beta"}));
    std::vector<std::string> again{"beta", "gamma"};
    e->embed(again);
    CHECK(calls == 2);
    CHECK(last_body["texts"] == json::array({"gamma"}));
  }
  SUBCASE("wrong dimension is a protocol error") {
    mode = "short";
    CHECK_THROWS_AS(make_embedder(c)->embed_one("alpha"), ProtocolError);
  }
  SUBCASE("wrong count is a protocol error") {
    mode = "missing";
    CHECK_THROWS_AS(make_embedder(c)->embed_one("alpha"), ProtocolError);
  }
  SUBCASE("non-200 is an endpoint error") {
    mode = "500";
    CHECK_THROWS_AS(make_embedder(c)->embed_one("alpha"), EndpointError);
  }
}

TEST_CASE("unreachable embed endpoint") {
  EmbedProviderConfig c;
  c.mode = EmbedProviderConfig::Mode::kHttpEndpoint;
  c.endpoint_url = "http://127.0.0.1:1";
  c.timeout_seconds = 2;
  CHECK_THROWS_AS(make_embedder(c)->embed_one("x"), EndpointError);
}
