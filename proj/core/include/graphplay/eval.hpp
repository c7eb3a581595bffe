#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/generation.hpp"
#include "graphplay/kg_store.hpp"
#include "graphplay/selfplay.hpp"

namespace graphplay {

// Same function as r_answer.
double accuracy(std::string_view candidate, std::string_view gold,
                double epsilon = 0.05);

// Unordered node pair stored as (min, max).
using NodePair = std::pair<std::string, std::string>;
NodePair unordered_pair(std::string_view a, std::string_view b);
std::set<NodePair> pairs_from_path(std::span<const std::string> nodes);

// 2|M & K| / (|M| + |K|). Throws InvariantError when `kg_pairs` is empty.
double path_f1(const std::set<NodePair>& model_pairs,
               const std::set<NodePair>& kg_pairs);

// [node:id] sentinels when present, otherwise alias mentions (node label,
// concept surface form), ordered by first mention; consecutive distinct
// mentions form pairs.
std::set<NodePair> extract_model_pairs(std::string_view answer, const KnowledgeGraph& g);

struct Hallucination {
  double halnum = 0.0;
  double halfact = 0.0;
  double rate = 0.0;
  std::size_t numbers = 0;
  std::size_t terms = 0;
};

// Each extracted number is compared with its nearest numeric fact (smallest
// relative error); errors above tau count. A zero fact matches only zero.
// Each extracted keyword counts when no term fact carries it.
// rate = (halnum + halfact) / 2; nothing extracted gives all zeros.
Hallucination hallucination_rate(std::string_view candidate,
                                 std::span<const Fact> facts, double tau = 0.05);
Hallucination hallucination_rate(std::string_view candidate,
                                 std::span<const std::string> path_nodes,
                                 const KnowledgeGraph& g, double tau = 0.05);

struct QAItem {
  std::string id;
  std::string question;
  std::string gold_answer;
  std::vector<std::string> gold_path;
  int hop_level = 1;
  QuestionType question_type = QuestionType::kFactual;
  std::vector<std::string> image_refs;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

nlohmann::json to_json(const QAItem& item);

struct DatasetLoad {
  std::vector<QAItem> items;
  std::vector<std::string> errors;  // "line N (id): reason"
};

// Parses and validates every line; invalid items are listed, not loaded.
DatasetLoad load_dataset(const std::filesystem::path& path);
DatasetLoad parse_dataset(std::string_view jsonl);
void write_dataset(const std::filesystem::path& path, std::span<const QAItem> items);

struct ItemResult {
  std::string id;
  int hop_level = 1;
  std::string answer;
  double accuracy = 0.0;
  std::optional<double> path_f1;
  Hallucination hallucination;
};

struct HopMetrics {
  int count = 0;
  double accuracy = 0.0;
};

struct MetricsReport {
  std::map<int, HopMetrics> per_hop;
  double accuracy = 0.0;
  double path_f1 = 0.0;
  int path_f1_items = 0;
  double halnum = 0.0;
  double halfact = 0.0;
  double hallucination_rate = 0.0;
  int count = 0;
  std::vector<ItemResult> items;
};

nlohmann::json to_json(const MetricsReport& r);
// Aligned table: 1-hop | 2-hop | 3-hop | Path F1 | Halluc. Rate
std::string to_table(const MetricsReport& r);

struct EvalOptions {
  double epsilon = 0.05;
  double tau = 0.05;
  GenerationSettings generation{256, 0.0};
};

MetricsReport evaluate_dataset(std::span<const QAItem> items, GenerationModel& model,
                               const KnowledgeGraph& g, const EvalOptions& opts = {});

// Synthetic dataset: `per_hop` items for each hop level 1..3, each from a
// sampled path of exactly that length and a proposed question.
std::vector<QAItem> generate_dataset(const KnowledgeGraph& g, GenerationModel& proposer,
                                     int per_hop, std::uint64_t seed,
                                     const TemplateSet& templates = {});

}  // namespace graphplay
