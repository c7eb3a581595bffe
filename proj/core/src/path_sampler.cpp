#include "graphplay/path_sampler.hpp"

#include <algorithm>

#include "graphplay/error.hpp"

namespace graphplay {

bool ReasoningPath::contains_type(EdgeType t) const {
  return std::any_of(edges.begin(), edges.end(),
                     [t](const KGEdge& e) { return e.type == t; });
}

nlohmann::json to_json(const ReasoningPath& p) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    auto e = to_json(p.edges[i]);
    e["forward"] = static_cast<bool>(p.forward[i]);
    edges.push_back(std::move(e));
  }
  return {{"nodes", p.nodes}, {"edges", std::move(edges)}};
}

ReasoningPath path_from_json(const nlohmann::json& j) {
  ReasoningPath p;
  p.nodes = j.at("nodes").get<std::vector<std::string>>();
  for (const auto& e : j.at("edges")) {
    p.edges.push_back(edge_from_json(e));
    p.forward.push_back(e.value("forward", true));
  }
  return p;
}

EdgeTypeWeights EdgeTypeWeights::defaults() {
  EdgeTypeWeights w;
  w.set(EdgeType::kSameConcept, 1.00);
  w.set(EdgeType::kContradicts, 0.95);
  w.set(EdgeType::kSupports, 0.90);
  w.set(EdgeType::kIllustrates, 0.90);
  w.set(EdgeType::kCompares, 0.90);
  w.set(EdgeType::kDefines, 0.85);
  w.set(EdgeType::kDerivesFrom, 0.85);
  w.set(EdgeType::kQuantifies, 0.80);
  w.set(EdgeType::kReferences, 0.80);
  w.set(EdgeType::kHasCaption, 0.50);
  w.set(EdgeType::kContains, 0.30);
  return w;
}

void EdgeTypeWeights::validate() const {
  bool any_positive = false;
  for (double w : values_) {
    if (!(w >= 0.0)) throw ConfigError("edge-type weights must be >= 0");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw ConfigError("edge-type weights: all zero");
}

std::string_view to_string(DifficultyLevel d) {
  switch (d) {
    case DifficultyLevel::kVQA: return "VQA";
    case DifficultyLevel::kFactual: return "Factual";
    case DifficultyLevel::kCausal: return "Causal";
    case DifficultyLevel::kInstructionFollowing: return "InstructionFollowing";
  }
  return "VQA";
}

std::optional<DifficultyLevel> parse_difficulty(std::string_view s) {
  for (auto d : {DifficultyLevel::kVQA, DifficultyLevel::kFactual,
                 DifficultyLevel::kCausal, DifficultyLevel::kInstructionFollowing})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

int HopSchedule::max_hops_at(int epoch) const {
  auto it = hops_from_epoch.upper_bound(epoch);
  return it == hops_from_epoch.begin() ? 1 : std::prev(it)->second;
}

DifficultyLevel HopSchedule::difficulty_at(int epoch) const {
  auto it = difficulty_from_epoch.upper_bound(epoch);
  return it == difficulty_from_epoch.begin() ? DifficultyLevel::kVQA
                                             : std::prev(it)->second;
}

void HopSchedule::validate() const {
  if (hops_from_epoch.empty() || hops_from_epoch.begin()->first != 0)
    throw ConfigError("hop schedule must define epoch 0");
  int prev = 1;
  for (const auto& [epoch, hops] : hops_from_epoch) {
    if (hops < prev) throw ConfigError("hop schedule must be non-decreasing and >= 1");
    prev = hops;
  }
  if (difficulty_from_epoch.empty() || difficulty_from_epoch.begin()->first != 0)
    throw ConfigError("difficulty schedule must define epoch 0");
}

CurriculumState CurriculumState::initial(const HopSchedule& schedule) {
  CurriculumState s;
  s.epoch = 0;
  s.max_hops = schedule.max_hops_at(0);
  s.difficulty = schedule.difficulty_at(0);
  return s;
}

EdgeTypeWeights effective_weights(const EdgeTypeWeights& base,
                                  const CurriculumState& cur) {
  EdgeTypeWeights out;
  for (auto t : kAllEdgeTypes) {
    auto it = cur.per_type_accuracy.find(t);
    double acc = it == cur.per_type_accuracy.end() ? 1.0 : it->second;
    out.set(t, base[t] / std::max(acc, 0.1));
  }
  return out;
}

CurriculumState advance_curriculum(const CurriculumState& cur,
                                   const std::map<EdgeType, double>& epoch_stats,
                                   const HopSchedule& schedule) {
  CurriculumState next;
  next.epoch = cur.epoch + 1;
  next.max_hops = std::max(cur.max_hops, schedule.max_hops_at(next.epoch));
  next.difficulty = schedule.difficulty_at(next.epoch);
  next.per_type_accuracy = epoch_stats;
  return next;
}

namespace {

bool walkable(const KnowledgeGraph& g, const KGEdge& e,
              const EdgeTypeWeights& weights, const SamplerOptions& options) {
  if (!g.is_valid(e) || !(weights[e.type] > 0.0)) return false;
  return !(options.excluded && options.excluded->count(e.key()));
}

}  // namespace

std::optional<Neighbor> draw_step(const KnowledgeGraph& g, std::string_view from,
                                  const std::set<std::string>& visited,
                                  const EdgeTypeWeights& weights,
                                  std::mt19937_64& rng,
                                  const SamplerOptions& options) {
  std::vector<Neighbor> options_out;
  double total = 0.0;
  for (auto& nb : g.neighbors(from)) {
    if (visited.count(nb.node->node_id)) continue;
    if (!walkable(g, nb.edge, weights, options)) continue;
    total += weights[nb.edge.type];
    options_out.push_back(std::move(nb));
  }
  if (options_out.empty()) return std::nullopt;
  double target = unit_draw(rng) * total;
  double acc = 0.0;
  for (auto& nb : options_out) {
    acc += weights[nb.edge.type];
    if (target < acc) return nb;
  }
  return options_out.back();
}

ReasoningPath sample_path(const KnowledgeGraph& g, const CurriculumState& cur,
                          const EdgeTypeWeights& base, std::mt19937_64& rng,
                          const SamplerOptions& options) {
  const EdgeTypeWeights weights = effective_weights(base, cur);

  std::vector<const std::string*> starts;
  for (const auto& [id, node] : g.nodes()) {
    for (const auto& key : g.incident_edges(id)) {
      if (walkable(g, *g.find_edge(key), weights, options)) {
        starts.push_back(&id);
        break;
      }
    }
  }
  if (starts.empty())
    throw NoPathAvailable("graph has no walkable edge");

  auto idx = static_cast<std::size_t>(unit_draw(rng) *
                                      static_cast<double>(starts.size()));
  idx = std::min(idx, starts.size() - 1);

  ReasoningPath path;
  path.nodes.push_back(*starts[idx]);
  std::set<std::string> visited{path.nodes.front()};
  const int max_hops = std::max(1, cur.max_hops);
  while (static_cast<int>(path.hops()) < max_hops) {
    auto step = draw_step(g, path.nodes.back(), visited, weights, rng, options);
    if (!step) break;
    path.edges.push_back(step->edge);
    path.forward.push_back(step->forward);
    path.nodes.push_back(step->node->node_id);
    visited.insert(step->node->node_id);
  }
  return path;
}

}  // namespace graphplay
