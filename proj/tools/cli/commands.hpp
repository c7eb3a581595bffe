#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/eval.hpp"
#include "run_config.hpp"

namespace graphplay::cli {

struct BuildKgResult {
  std::vector<std::filesystem::path> snapshots;
  std::vector<std::string> failures;  // "path: reason"
};

// One snapshot directory per document under `out`, named by doc_id, with a
// construction report next to the snapshot files.
BuildKgResult cmd_build_kg(const RunConfig& cfg, const std::filesystem::path& out);

std::filesystem::path cmd_federate(const RunConfig& cfg,
                                   std::span<const std::filesystem::path> inputs,
                                   const std::filesystem::path& out);

struct SelfPlaySummary {
  int epochs_run = 0;
  std::size_t preferences_written = 0;
  nlohmann::json curriculum = nlohmann::json::array();
};

// Layout: fingerprint.json, curriculum.json, refine_audit.jsonl,
// epoch_NNN/{stats.json,preferences.jsonl}, final_kg/.
SelfPlaySummary cmd_selfplay(const RunConfig& cfg, const std::filesystem::path& snapshot,
                             const std::filesystem::path& out);

// Writes report.json and report.txt. Invalid dataset lines raise SchemaError
// listing every offending item.
MetricsReport cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& snapshot,
                           const std::filesystem::path& dataset,
                           const std::filesystem::path& out);

// Validates every epoch's preferences.jsonl of a run and concatenates them.
std::size_t cmd_export_prefs(const std::filesystem::path& run_dir,
                             const std::filesystem::path& out_file);

std::size_t cmd_gen_dataset(const RunConfig& cfg, const std::filesystem::path& snapshot,
                            int per_hop, const std::filesystem::path& out_file);

}  // namespace graphplay::cli
