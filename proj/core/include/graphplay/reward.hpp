#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/kg_store.hpp"
#include "graphplay/path_sampler.hpp"

namespace graphplay {

struct RewardWeights {
  double w_a = 0.5;
  double w_p = 0.3;
  double w_c = 0.2;

  // Throws InvariantError unless every weight is >= 0 and they sum to 1
  // within 1e-9.
  void validate() const;
  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

struct RewardBreakdown {
  double r_answer = 0.0;
  double r_path = 0.0;
  double r_consistency = 0.0;
  double total = 0.0;
  RewardWeights weights_used;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

nlohmann::json to_json(const RewardBreakdown& b);
RewardBreakdown breakdown_from_json(const nlohmann::json& j);

struct AnnealSchedule {
  RewardWeights initial{0.5, 0.3, 0.2};
  RewardWeights final_weights{0.3, 0.4, 0.3};
  int total_epochs = 30;
};

// Relative error |x - ref| / |ref|. A zero reference gives 0 when x is also
// zero and +inf otherwise.
double relative_error(double x, double ref);

// The three answer-matching criteria, each in [0,1].
struct AnswerMatch {
  double containment = 0.0;
  double numeric = 0.0;
  double keyword_overlap = 0.0;
  double score() const;
};

// Containment: normalized gold is a substring of the normalized candidate.
// Numeric: both sides carry a number and some candidate number lies within
// relative `epsilon` of the first gold number. Keyword overlap:
// |K(candidate) & K(gold)| / |K(gold)| (0 when K(gold) is empty).
// `gold_keywords` overrides K(gold) when given. Throws InvariantError for an
// empty gold answer.
AnswerMatch match_answer(std::string_view candidate, std::string_view gold,
                         double epsilon = 0.05,
                         const std::set<std::string>* gold_keywords = nullptr);

// max of the three criteria. Shared by rewards and evaluation accuracy.
double r_answer(std::string_view candidate, std::string_view gold,
                double epsilon = 0.05,
                const std::set<std::string>* gold_keywords = nullptr);

// Fraction of consecutive declared pairs joined by a valid edge. Fewer than
// two ids is a degenerate declaration scored 0.
double r_path(std::span<const std::string> declared, const KnowledgeGraph& g);
inline bool is_degenerate_declaration(std::span<const std::string> declared) {
  return declared.size() < 2;
}

// Numbers and keywords of the candidate checked against the facts of the
// given nodes. 1.0 when nothing is extractable.
double r_consistency(std::string_view candidate,
                     std::span<const std::string> path_nodes,
                     const KnowledgeGraph& g, double tau_num = 0.05);
double r_consistency(std::string_view candidate, const ReasoningPath& path,
                     const KnowledgeGraph& g, double tau_num = 0.05);

// Exact weighted sum. Throws InvariantError for components outside [0,1] or
// unnormalized weights.
double total_reward(double r_answer, double r_path, double r_consistency,
                    const RewardWeights& w);
RewardBreakdown make_breakdown(double r_answer, double r_path,
                               double r_consistency, const RewardWeights& w);

// Linear interpolation initial -> final over epochs [0, total_epochs - 1],
// clamped outside (endpoints returned exactly), renormalized to sum 1.
RewardWeights anneal_weights(const AnnealSchedule& sched, int epoch);

}  // namespace graphplay
