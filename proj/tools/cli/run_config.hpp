#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/classifier.hpp"
#include "graphplay/construct.hpp"
#include "graphplay/embed.hpp"
#include "graphplay/generation.hpp"
#include "graphplay/path_sampler.hpp"
#include "graphplay/refine.hpp"
#include "graphplay/reward.hpp"
#include "graphplay/selfplay.hpp"

namespace graphplay::cli {

// One resolved run configuration. Defaults follow the published
// hyperparameters; every relative path is resolved against the directory of
// the config file it came from.
struct RunConfig {
  std::vector<std::filesystem::path> corpus;
  std::filesystem::path output_dir = "run";

  std::string generate_url;
  std::string embed_url;
  std::string classify_url;
  std::filesystem::path scenario;           // generation stub
  std::filesystem::path classifier_script;  // relation stub
  std::size_t embed_dim = 384;
  int max_in_flight = 4;
  int timeout_seconds = 120;

  std::uint64_t seed = 0;
  int epochs = 30;

  ConstructConfig construct;
  SelfPlayConfig selfplay;
  HopSchedule schedule;
  AnnealSchedule anneal;
  RefineConfig refine;
  bool refine_enabled = true;
  bool merge_nodes = true;
  bool quarantine_new_edges = false;
  TrainerMetadata trainer;

  // Throws ConfigError naming the offending field.
  void validate() const;
  nlohmann::json to_json() const;
  // Hex FNV-1a over the resolved config and the code version.
  std::string fingerprint() const;
};

// Keys absent from `j` keep their defaults. Unknown keys and invalid values
// raise ConfigError; the result is validated.
RunConfig config_from_json(const nlohmann::json& j,
                           const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

std::string code_version();

void write_fingerprint(const RunConfig& cfg, const std::filesystem::path& dir,
                       const std::string& command);

std::unique_ptr<GenerationModel> make_generation_model(const RunConfig& cfg);
std::unique_ptr<Embedder> make_run_embedder(const RunConfig& cfg);
std::unique_ptr<RelationClassifier> make_classifier(const RunConfig& cfg);

}  // namespace graphplay::cli
