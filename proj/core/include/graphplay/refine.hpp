#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/classifier.hpp"
#include "graphplay/embed.hpp"
#include "graphplay/kg_store.hpp"
#include "graphplay/selfplay.hpp"

namespace graphplay {

struct RefineConfig {
  double high_reward_threshold = 0.8;
  double confidence_penalty = 0.05;
  double new_edge_confidence = 0.5;
  double tau_prune = 0.15;
  double tau_merge = 0.88;

  // Every field must lie in (0,1); throws ConfigError.
  void validate() const;
};

struct EdgePenalty {
  EdgeKey key;
  int hits = 0;
  double before = 0.0;
  double after = 0.0;
  friend bool operator==(const EdgePenalty&, const EdgePenalty&) = default;
};

struct RefinementBatch {
  int epoch = 0;
  std::uint64_t base_version = 0;
  std::vector<KGEdge> added;
  std::vector<EdgePenalty> penalized;  // retained edges
  std::vector<EdgePenalty> removed;    // dropped below tau_prune
  std::vector<std::pair<std::string, std::string>> merged;  // (absorbed, survivor)

  bool empty() const {
    return added.empty() && penalized.empty() && removed.empty() && merged.empty();
  }
  friend bool operator==(const RefinementBatch&, const RefinementBatch&) = default;
};

nlohmann::json to_json(const RefinementBatch& b);

// Declared pairs without a valid edge, taken from ok episodes whose best
// total reward reaches high_reward_threshold. Typed by the classifier (None
// or no classifier falls back to References); deduplicated on the unordered
// pair, first occurrence wins.
std::vector<KGEdge> detect_missing(std::span<const QAEpisode> episodes,
                                   const KnowledgeGraph& g, const RefineConfig& cfg,
                                   RelationClassifier* classifier);

// Every sampled-path edge of an ok episode whose best candidate scored
// r_answer = 0 loses confidence_penalty per implication. Edges ending below
// tau_prune go to `removed`.
RefinementBatch prune_spurious(std::span<const QAEpisode> episodes,
                               const KnowledgeGraph& g, const RefineConfig& cfg);

// Same-type, same-document pairs with cosine > tau_merge, closed
// transitively; the lexicographically smallest id survives.
std::vector<std::pair<std::string, std::string>> merge_candidates(
    const KnowledgeGraph& g, Embedder& embedder, double tau_merge);

// detect_missing + prune_spurious (+ merges when an embedder is given),
// stamped with g's version.
RefinementBatch build_refinement(std::span<const QAEpisode> episodes,
                                 const KnowledgeGraph& g, const RefineConfig& cfg,
                                 RelationClassifier* classifier, Embedder* embedder,
                                 int epoch);

// Applies penalties, removals, additions and merges to a copy and returns it
// with version + 1. Throws StaleBatchError when the batch was built against
// another version; `g` is never modified.
KnowledgeGraph apply_batch(const KnowledgeGraph& g, const RefinementBatch& batch);

void append_audit_log(const std::filesystem::path& path, const RefinementBatch& b);

}  // namespace graphplay
