// Hot paths of a self-play epoch: walks, reward scoring, graph construction
// and one scripted epoch end to end.

#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "graphplay/classifier.hpp"
#include "graphplay/construct.hpp"
#include "graphplay/embed.hpp"
#include "graphplay/generation.hpp"
#include "graphplay/path_sampler.hpp"
#include "graphplay/reward.hpp"
#include "graphplay/selfplay.hpp"

using namespace graphplay;

namespace {

std::string fixture(const std::string& rel) { return std::string(GRAPHPLAY_FIXTURES) + "/" + rel; }

// Random graph with ~4 edges per node, all above the validity floor.
KnowledgeGraph random_graph(int nodes) {
  KnowledgeGraph g;
  std::mt19937_64 rng(1);
  for (int i = 0; i < nodes; ++i) {
    KGNode n;
    n.node_id = "n" + std::to_string(i);
    n.doc_id = "d";
    n.content = "Node " + std::to_string(i) + " reports accuracy of " + std::to_string(i % 97) + ".";
    g.upsert_node(n);
  }
  for (int k = 0; k < 4 * nodes; ++k) {
    int a = static_cast<int>(rng() % nodes), b = static_cast<int>(rng() % nodes);
    if (a == b) continue;
    g.upsert_edge({"n" + std::to_string(a), "n" + std::to_string(b),
                   kAllEdgeTypes[rng() % kEdgeTypeCount], 0.2 + 0.8 * unit_draw(rng)});
  }
  return g;
}

std::unique_ptr<ScriptedClassifier> classifier_fixture() {
  std::ifstream in(fixture("classifier.json"));
  return ScriptedClassifier::from_json(nlohmann::json::parse(in));
}

KnowledgeGraph fixture_graph() {
  HashingEmbedder emb;
  auto cls = classifier_fixture();
  std::vector<KnowledgeGraph> docs;
  for (auto name : {"paperA", "paperB", "paperC"}) {
    ConstructionReport report;
    docs.push_back(build_document_graph(load_document(fixture(std::string("corpus/") + name + ".json")),
                                        emb, *cls, ConstructConfig{}, report));
  }
  return federate(docs, emb, 0.85);
}

void BM_SamplePath(benchmark::State& state) {
  const KnowledgeGraph g = random_graph(static_cast<int>(state.range(0)));
  CurriculumState cur;
  cur.max_hops = 3;
  std::mt19937_64 rng(2);
  const auto w = EdgeTypeWeights::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(sample_path(g, cur, w, rng));
}
BENCHMARK(BM_SamplePath)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RAnswer(benchmark::State& state) {
  const std::string gold = "The graph-guided model reaches 93% accuracy on the multi-hop split.";
  const std::string cand = "It reaches about 92.5 percent accuracy, guided by the graph.";
  for (auto _ : state) benchmark::DoNotOptimize(r_answer(cand, gold));
}
BENCHMARK(BM_RAnswer);

void BM_RPath(benchmark::State& state) {
  const KnowledgeGraph g = random_graph(1000);
  const std::vector<std::string> declared{"n1", "n2", "n3", "n4"};
  for (auto _ : state) benchmark::DoNotOptimize(r_path(declared, g));
}
BENCHMARK(BM_RPath);

void BM_BuildDocumentGraph(benchmark::State& state) {
  const DocumentIR doc = load_document(fixture("corpus/paperA.json"));
  HashingEmbedder emb;
  auto cls = classifier_fixture();
  for (auto _ : state) {
    ConstructionReport report;
    benchmark::DoNotOptimize(build_document_graph(doc, emb, *cls, ConstructConfig{}, report));
  }
}
BENCHMARK(BM_BuildDocumentGraph);

void BM_ScriptedEpoch(benchmark::State& state) {
  const KnowledgeGraph g = fixture_graph();
  auto model = ScriptedModel::from_file(fixture("scenarios/mixed.json"));
  SelfPlayConfig cfg;
  cfg.questions_per_epoch = 100;
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_epoch(g, CurriculumState{}, cfg, RewardWeights{}, *model, ++seed));
}
BENCHMARK(BM_ScriptedEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
