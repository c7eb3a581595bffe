#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/generation.hpp"
#include "graphplay/kg_store.hpp"
#include "graphplay/path_sampler.hpp"
#include "graphplay/prompts.hpp"
#include "graphplay/reward.hpp"

namespace graphplay {

enum class QuestionType { kFactual, kComparative, kCausal, kSynthesis };
std::string_view to_string(QuestionType t);
std::optional<QuestionType> parse_question_type(std::string_view s);

// Comparative when the path carries Compares/Contradicts, Synthesis for
// multi-hop paths, Causal for Supports/DerivesFrom, Factual otherwise.
QuestionType classify_question(const ReasoningPath& path);

struct GoldAnswer {
  std::string text;
  std::string cell;  // "row | col" for table terminals
};

// Terminal text/claim/concept: first sentence. Table: first numeric cell.
// Figure: its caption. Equation: its label, else the first line.
GoldAnswer extract_gold(const KGNode& terminal);

struct ProposedQuestion {
  std::string question;
  std::string gold_answer;
  ReasoningPath path;
  std::vector<std::string> declared_path;
  QuestionType question_type = QuestionType::kFactual;
  std::vector<std::string> image_refs;
  DifficultyLevel difficulty = DifficultyLevel::kVQA;
};

struct ProposeOutcome {
  std::optional<ProposedQuestion> proposed;
  std::string finding;  // set when proposed is empty
  int attempts = 0;
};

struct GenerationSettings {
  int max_tokens = 256;
  double temperature = 0.7;
};

// One repair retry on malformed output. Endpoint errors propagate.
ProposeOutcome propose(const ReasoningPath& path, const KnowledgeGraph& g,
                       const TemplateSet& templates, DifficultyLevel difficulty,
                       GenerationModel& model, std::uint64_t seed,
                       const GenerationSettings& settings = {});

struct SolverCall {
  std::string prompt;
  std::vector<std::string> image_refs;
  std::vector<std::string> raw;  // G replies in request order
};

// One n=G request when `batch` is set, else G requests with n=1 and seeds
// seed, seed+1, ...
SolverCall solve(const ProposedQuestion& q, GenerationModel& model, int group_size,
                 std::uint64_t seed, bool batch = true,
                 const GenerationSettings& settings = {});

// A_i = r_i - mean(r). Throws InvariantError on an empty list.
std::vector<double> compute_advantages(std::span<const double> rewards);

struct SelfPlayConfig {
  int questions_per_epoch = 100;
  int group_size = 8;
  GenerationSettings generation;
  bool batch_solver = true;
  int max_in_flight = 1;
  double epsilon = 0.05;
  double tau_num = 0.05;
  double retention_threshold = 0.5;
  int minibatch_every = 15;
  EdgeTypeWeights edge_weights = EdgeTypeWeights::defaults();
  TemplateSet templates;
  const std::set<EdgeKey>* excluded_edges = nullptr;

  // Throws ConfigError.
  void validate() const;
};

enum class EpisodeStatus { kOk, kSkipped, kFailed };
std::string_view to_string(EpisodeStatus s);

struct QAEpisode {
  int epoch = 0;
  int index = 0;
  std::uint64_t seed = 0;
  EpisodeStatus status = EpisodeStatus::kOk;
  std::string finding;

  ProposedQuestion proposed;
  SolverCall solver;
  std::vector<std::string> answers;  // parsed from solver.raw
  std::vector<RewardBreakdown> rewards;
  std::vector<double> advantages;
  bool kept = false;

  double mean_r_answer = 0.0;
  double proposer_reward = 0.0;
  double proposer_advantage = 0.0;

  // Candidate index with the highest total; ties go to the lower index.
  std::size_t best_candidate() const;
  double max_total() const;
};

struct MinibatchEvent {
  int ordinal = 0;
  std::vector<int> episode_indices;
};

struct EpochStats {
  int epoch = 0;
  int max_hops = 1;
  DifficultyLevel difficulty = DifficultyLevel::kVQA;
  RewardWeights weights;
  int attempted = 0;
  int ok = 0;
  int skipped = 0;
  int failed = 0;
  int kept = 0;
  std::map<EdgeType, double> per_type_accuracy;
  std::map<EdgeType, int> per_type_episodes;
  double mean_r_answer = 0.0;
  double mean_total_reward = 0.0;
  // The Proposer's credit as the mean and as the sum of the group's totals,
  // averaged over episodes. r_Proposer uses the mean.
  double proposer_credit_mean = 0.0;
  double proposer_credit_sum = 0.0;
  double mean_proposer_reward = 0.0;
  std::vector<MinibatchEvent> minibatches;
  std::vector<std::string> findings;
};

nlohmann::json to_json(const EpochStats& s);

struct EpochResult {
  std::vector<QAEpisode> episodes;
  EpochStats stats;
};

// r_Proposer = w_p * R_path(declared) + w_c * (1 - |mean R_answer - 0.5| * 2).
double proposer_reward(double r_path_declared, double mean_r_answer,
                       const RewardWeights& w);

// Samples, proposes, solves and scores questions_per_epoch episodes.
// Episode i uses seed mix64(epoch_seed ^ i). Throws EndpointError when more
// than half of the episodes fail at an endpoint.
EpochResult run_epoch(const KnowledgeGraph& g, const CurriculumState& cur,
                      const SelfPlayConfig& config, const RewardWeights& weights,
                      GenerationModel& model, std::uint64_t epoch_seed);

struct TrainerMetadata {
  double beta = 0.1;
  double learning_rate = 2.0e-4;
  int lora_rank = 16;
  int lora_alpha = 32;
  double lora_dropout = 0.05;
  std::vector<std::string> lora_targets{"q_proj", "v_proj"};
  int batch_size = 2;
  int grad_accum = 4;
  int max_update_steps = 100;
  std::string config_hash;

  friend bool operator==(const TrainerMetadata&, const TrainerMetadata&) = default;
};

struct PreferenceRecord {
  int epoch = 0;
  int episode = 0;
  std::string question;
  std::string gold_answer;
  std::vector<std::string> candidates;
  std::vector<RewardBreakdown> rewards;
  std::vector<double> advantages;
  std::vector<int> ranking;  // best first
  // (chosen, rejected) for every strictly ordered reward pair
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::string> path_nodes;
  std::vector<std::string> declared_path;
  TrainerMetadata trainer;

  friend bool operator==(const PreferenceRecord&, const PreferenceRecord&) = default;
};

PreferenceRecord make_preference_record(const QAEpisode& e,
                                        const TrainerMetadata& meta);
nlohmann::json to_json(const PreferenceRecord& r);
PreferenceRecord preference_from_json(const nlohmann::json& j);

// One line per kept episode. Returns the number written.
std::size_t export_preferences(std::span<const QAEpisode> episodes,
                               const std::filesystem::path& path,
                               const TrainerMetadata& meta);
std::vector<PreferenceRecord> load_preferences(const std::filesystem::path& path);

struct AuditResult {
  bool ok = true;
  std::string detail;
};

// Checks that the Solver saw only the question: its prompt must equal
// render_solver_prompt(question), the scaffold around the question must not
// mention any path node id, node content or the gold answer, and its images
// must be the question's.
AuditResult audit_asymmetry(const QAEpisode& e, const KnowledgeGraph& g);

}  // namespace graphplay
