#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "graphplay/error.hpp"

namespace fs = std::filesystem;
using namespace graphplay;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitEndpoint = 3;

struct Overrides {
  std::string config;
  std::vector<std::string> corpus;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> questions;
  std::optional<int> group_size;
  std::optional<int> max_tokens;
  std::optional<double> temperature;
  std::optional<int> max_in_flight;
  std::string scenario;
  std::string classifier;
  std::string generate_url;
  std::string embed_url;
  std::string classify_url;
  bool quarantine = false;
  bool no_refine = false;
};

cli::RunConfig resolve(const Overrides& o) {
  cli::RunConfig c = o.config.empty() ? cli::RunConfig{} : cli::load_config(o.config);
  if (!o.corpus.empty()) {
    c.corpus.clear();
    for (const auto& p : o.corpus) c.corpus.emplace_back(p);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.questions) c.selfplay.questions_per_epoch = *o.questions;
  if (o.group_size) c.selfplay.group_size = *o.group_size;
  if (o.max_tokens) c.selfplay.generation.max_tokens = *o.max_tokens;
  if (o.temperature) c.selfplay.generation.temperature = *o.temperature;
  if (o.max_in_flight) c.max_in_flight = *o.max_in_flight;
  if (!o.scenario.empty()) c.scenario = o.scenario;
  if (!o.classifier.empty()) c.classifier_script = o.classifier;
  if (!o.generate_url.empty()) c.generate_url = o.generate_url;
  if (!o.embed_url.empty()) c.embed_url = o.embed_url;
  if (!o.classify_url.empty()) c.classify_url = o.classify_url;
  if (o.quarantine) c.quarantine_new_edges = true;
  if (o.no_refine) c.refine_enabled = false;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph grounded self-play: build, federate, play, evaluate"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "Run config JSON (flags override it)");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--max-in-flight", o.max_in_flight, "Concurrent endpoint requests");
  app.add_option("--generate-url", o.generate_url, "Generation endpoint base URL");
  app.add_option("--embed-url", o.embed_url, "Embedding endpoint base URL");
  app.add_option("--classify-url", o.classify_url, "Relation classifier base URL");
  app.add_option("--scenario", o.scenario, "Scripted generation scenario (offline)");
  app.add_option("--classifier-script", o.classifier, "Scripted relation table (offline)");

  std::string out;
  std::vector<std::string> inputs;
  std::string snapshot, dataset, run_dir;
  int per_hop = 10;

  auto* build = app.add_subcommand("build-kg", "Build one snapshot per document");
  build->add_option("--corpus", o.corpus, "Document IR JSON files");
  build->add_option("--out", out, "Output directory")->required();

  auto* fed = app.add_subcommand("federate", "Merge per-document snapshots");
  fed->add_option("inputs", inputs, "Snapshot directories")->required();
  fed->add_option("--out", out, "Output snapshot directory")->required();

  auto* play = app.add_subcommand("selfplay-run", "Run self-play epochs on a snapshot");
  play->add_option("--snapshot", snapshot, "Input snapshot directory")->required();
  play->add_option("--out", out, "Run directory")->required();
  play->add_option("--epochs", o.epochs, "Epochs (default 30)");
  play->add_option("--questions", o.questions, "Questions per epoch (default 100)");
  play->add_option("--group-size", o.group_size, "Solver candidates G (default 8)");
  play->add_option("--max-tokens", o.max_tokens, "Generation length (default 256)");
  play->add_option("--temperature", o.temperature, "Sampling temperature");
  play->add_flag("--quarantine-new-edges", o.quarantine,
                 "Keep refinement-added edges out of sampling for one epoch");
  play->add_flag("--no-refine", o.no_refine, "Skip graph refinement");

  auto* eval = app.add_subcommand("evaluate", "Score a QA dataset");
  eval->add_option("--snapshot", snapshot, "Snapshot directory")->required();
  eval->add_option("--dataset", dataset, "QA items (JSON lines)")->required();
  eval->add_option("--out", out, "Report directory")->required();

  auto* prefs = app.add_subcommand("export-prefs", "Collect a run's preference records");
  prefs->add_option("--run", run_dir, "Run directory")->required();
  prefs->add_option("--out", out, "Output JSON-lines file")->required();

  auto* gen = app.add_subcommand("gen-dataset", "Synthesize a QA dataset from a snapshot");
  gen->add_option("--snapshot", snapshot, "Snapshot directory")->required();
  gen->add_option("--out", out, "Output JSON-lines file")->required();
  gen->add_option("--per-hop", per_hop, "Items per hop level (default 10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*prefs) {
      const auto n = cli::cmd_export_prefs(run_dir, out);
      std::cout << n << " preference records -> " << out << "\n";
      return kExitOk;
    }
    const cli::RunConfig cfg = resolve(o);
    if (*build) {
      auto r = cli::cmd_build_kg(cfg, out);
      for (const auto& s : r.snapshots) std::cout << s.string() << "\n";
      for (const auto& f : r.failures) std::cerr << "error: " << f << "\n";
      return r.failures.empty() ? kExitOk : kExitData;
    }
    if (*fed) {
      std::vector<fs::path> dirs(inputs.begin(), inputs.end());
      std::cout << cli::cmd_federate(cfg, dirs, out).string() << "\n";
      return kExitOk;
    }
    if (*play) {
      auto s = cli::cmd_selfplay(cfg, snapshot, out);
      std::cout << s.epochs_run << " epochs, " << s.preferences_written
                << " preference records -> " << out << "\n";
      return kExitOk;
    }
    if (*eval) {
      auto r = cli::cmd_evaluate(cfg, snapshot, dataset, out);
      std::cout << to_table(r);
      return kExitOk;
    }
    if (*gen) {
      auto n = cli::cmd_gen_dataset(cfg, snapshot, per_hop, out);
      std::cout << n << " items -> " << out << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EndpointError& e) {
    std::cerr << "endpoint error: " << e.what() << "\n";
    return kExitEndpoint;
  } catch (const ProtocolError& e) {
    std::cerr << "endpoint protocol error: " << e.what() << "\n";
    return kExitEndpoint;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
