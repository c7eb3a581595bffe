#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/kg_store.hpp"

namespace graphplay {

// P = (n0, e1, n1, ..., ek, nk). `forward[i]` records whether edges[i] was
// walked along its stored direction.
struct ReasoningPath {
  std::vector<std::string> nodes;
  std::vector<KGEdge> edges;
  std::vector<bool> forward;

  std::size_t hops() const { return edges.size(); }
  const std::string& terminal() const { return nodes.back(); }
  bool contains_type(EdgeType t) const;
  friend bool operator==(const ReasoningPath&, const ReasoningPath&) = default;
};

nlohmann::json to_json(const ReasoningPath& p);
ReasoningPath path_from_json(const nlohmann::json& j);

// Per-edge-type weight table.
class EdgeTypeWeights {
 public:
  EdgeTypeWeights() { values_.fill(0.0); }
  static EdgeTypeWeights defaults();

  double operator[](EdgeType t) const { return values_[static_cast<std::size_t>(t)]; }
  void set(EdgeType t, double w) { values_[static_cast<std::size_t>(t)] = w; }
  // Throws ConfigError on a negative weight or an all-zero table.
  void validate() const;

  friend bool operator==(const EdgeTypeWeights&, const EdgeTypeWeights&) = default;

 private:
  std::array<double, kEdgeTypeCount> values_;
};

enum class DifficultyLevel { kVQA, kFactual, kCausal, kInstructionFollowing };
std::string_view to_string(DifficultyLevel d);
std::optional<DifficultyLevel> parse_difficulty(std::string_view s);

// Step schedules keyed by the first epoch each value applies to.
struct HopSchedule {
  std::map<int, int> hops_from_epoch{{0, 1}, {10, 2}, {20, 3}};
  std::map<int, DifficultyLevel> difficulty_from_epoch{
      {0, DifficultyLevel::kVQA},
      {8, DifficultyLevel::kFactual},
      {15, DifficultyLevel::kCausal},
      {23, DifficultyLevel::kInstructionFollowing}};

  int max_hops_at(int epoch) const;
  DifficultyLevel difficulty_at(int epoch) const;
  // Throws ConfigError unless both maps start at epoch 0 and hops are >= 1
  // and non-decreasing.
  void validate() const;
};

struct CurriculumState {
  int epoch = 0;
  int max_hops = 1;
  std::map<EdgeType, double> per_type_accuracy;  // previous epoch
  DifficultyLevel difficulty = DifficultyLevel::kVQA;

  static CurriculumState initial(const HopSchedule& schedule);
};

// w'(t) = base(t) / max(acc(t), 0.1); a type without an accuracy entry keeps
// its base weight.
EdgeTypeWeights effective_weights(const EdgeTypeWeights& base,
                                  const CurriculumState& cur);

// epoch + 1, hops and difficulty from the schedule, accuracies replaced by
// the completed epoch's statistics.
CurriculumState advance_curriculum(const CurriculumState& cur,
                                   const std::map<EdgeType, double>& epoch_stats,
                                   const HopSchedule& schedule);

// Uniform double in [0,1) from the top 53 bits; platform independent.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct SamplerOptions {
  // Edges that may not be walked (quarantined refinement additions).
  const std::set<EdgeKey>* excluded = nullptr;
};

// Weighted random walk. The start node is uniform over nodes with at least
// one walkable incident edge (valid confidence, positive effective weight).
// Each step draws among edges to unvisited neighbors with probability
// proportional to the effective weight of the edge type. Stops at
// cur.max_hops or at a dead end. Throws NoPathAvailable when no walkable
// edge exists.
ReasoningPath sample_path(const KnowledgeGraph& g, const CurriculumState& cur,
                          const EdgeTypeWeights& base, std::mt19937_64& rng,
                          const SamplerOptions& options = {});

// Draws one step from `from` excluding `visited`. Exposed for the frequency
// tests of the first-step distribution.
std::optional<Neighbor> draw_step(const KnowledgeGraph& g, std::string_view from,
                                  const std::set<std::string>& visited,
                                  const EdgeTypeWeights& weights,
                                  std::mt19937_64& rng,
                                  const SamplerOptions& options = {});

}  // namespace graphplay
