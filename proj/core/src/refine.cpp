#include "graphplay/refine.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "graphplay/error.hpp"

namespace graphplay {

void RefineConfig::validate() const {
  for (double v : {high_reward_threshold, confidence_penalty, new_edge_confidence,
                   tau_prune, tau_merge})
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("refine thresholds must lie in (0,1)");
}

namespace {

nlohmann::json key_json(const EdgeKey& k) {
  return {{"src", k.src}, {"dst", k.dst}, {"type", std::string(to_string(k.type))}};
}

nlohmann::json penalty_json(const EdgePenalty& p) {
  auto j = key_json(p.key);
  j["hits"] = p.hits;
  j["before"] = p.before;
  j["after"] = p.after;
  return j;
}

}  // namespace

nlohmann::json to_json(const RefinementBatch& b) {
  nlohmann::json added = nlohmann::json::array();
  for (const auto& e : b.added) {
    auto j = key_json(e.key());
    j["confidence"] = e.confidence;
    added.push_back(j);
  }
  nlohmann::json pen = nlohmann::json::array(), rem = nlohmann::json::array();
  for (const auto& p : b.penalized) pen.push_back(penalty_json(p));
  for (const auto& p : b.removed) rem.push_back(penalty_json(p));
  nlohmann::json merged = nlohmann::json::array();
  for (const auto& [a, s] : b.merged) merged.push_back({{"absorbed", a}, {"survivor", s}});
  return {{"epoch", b.epoch},      {"base_version", b.base_version},
          {"added", added},        {"penalized", pen},
          {"removed", rem},        {"merged", merged}};
}

std::vector<KGEdge> detect_missing(std::span<const QAEpisode> episodes,
                                   const KnowledgeGraph& g, const RefineConfig& cfg,
                                   RelationClassifier* classifier) {
  std::vector<KGEdge> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : episodes) {
    if (e.status != EpisodeStatus::kOk || e.rewards.empty()) continue;
    if (e.max_total() < cfg.high_reward_threshold) continue;
    const auto& d = e.proposed.declared_path;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      const std::string& x = d[i];
      const std::string& y = d[i + 1];
      if (x == y || g.has_valid_edge(x, y)) continue;
      const KGNode* nx = g.find_node(x);
      const KGNode* ny = g.find_node(y);
      if (!nx || !ny) continue;  // an edge needs existing endpoints
      if (!seen.insert(std::minmax(x, y)).second) continue;
      EdgeType type = EdgeType::kReferences;
      if (classifier) {
        if (auto t = to_edge_type(classifier->classify(*nx, *ny).label)) type = *t;
      }
      out.push_back({x, y, type, cfg.new_edge_confidence});
    }
  }
  return out;
}

RefinementBatch prune_spurious(std::span<const QAEpisode> episodes,
                               const KnowledgeGraph& g, const RefineConfig& cfg) {
  std::map<EdgeKey, int> hits;
  for (const auto& e : episodes) {
    if (e.status != EpisodeStatus::kOk || e.rewards.empty()) continue;
    if (e.rewards[e.best_candidate()].r_answer != 0.0) continue;
    for (const auto& edge : e.proposed.path.edges) ++hits[edge.key()];
  }
  RefinementBatch b;
  b.base_version = g.version();
  for (const auto& [key, n] : hits) {
    const KGEdge* edge = g.find_edge(key);
    if (!edge) continue;
    EdgePenalty p{key, n, edge->confidence,
                  std::max(0.0, edge->confidence - n * cfg.confidence_penalty)};
    (p.after < cfg.tau_prune ? b.removed : b.penalized).push_back(p);
  }
  return b;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<std::pair<std::string, std::string>> merge_candidates(
    const KnowledgeGraph& g, Embedder& embedder, double tau_merge) {
  std::vector<const KGNode*> nodes;
  std::vector<std::string> texts;
  for (const auto& [id, n] : g.nodes()) {
    if (n.embedding || !n.content.empty()) {
      nodes.push_back(&n);
      texts.push_back(n.content);
    }
  }
  if (nodes.empty()) return {};
  std::vector<EmbeddingVector> vecs(nodes.size());
  {
    std::vector<std::size_t> todo;
    std::vector<std::string> batch;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i]->embedding) {
        vecs[i].values = *nodes[i]->embedding;
      } else {
        todo.push_back(i);
        batch.push_back(texts[i]);
      }
    }
    if (!batch.empty()) {
      auto out = embedder.embed(batch);
      for (std::size_t k = 0; k < todo.size(); ++k) vecs[todo[k]] = std::move(out[k]);
    }
  }

  // nodes are in id order, so the union-find root is the smallest id
  UnionFind uf(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (vecs[i].norm() == 0.0) continue;
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i]->type != nodes[j]->type || nodes[i]->doc_id != nodes[j]->doc_id)
        continue;
      if (vecs[j].norm() == 0.0 || vecs[j].dim() != vecs[i].dim()) continue;
      if (cosine(vecs[i], vecs[j]) > tau_merge) uf.unite(i, j);
    }
  }
  std::vector<std::pair<std::string, std::string>> merged;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t r = uf.find(i);
    if (r != i) merged.emplace_back(nodes[i]->node_id, nodes[r]->node_id);
  }
  return merged;
}

RefinementBatch build_refinement(std::span<const QAEpisode> episodes,
                                 const KnowledgeGraph& g, const RefineConfig& cfg,
                                 RelationClassifier* classifier, Embedder* embedder,
                                 int epoch) {
  cfg.validate();
  RefinementBatch b = prune_spurious(episodes, g, cfg);
  b.epoch = epoch;
  b.base_version = g.version();
  b.added = detect_missing(episodes, g, cfg, classifier);
  if (embedder) b.merged = merge_candidates(g, *embedder, cfg.tau_merge);
  return b;
}

namespace {

void merge_into(KnowledgeGraph& g, const std::string& absorbed,
                const std::string& survivor) {
  const KGNode* a = g.find_node(absorbed);
  const KGNode* s = g.find_node(survivor);
  if (!a || !s) throw InvariantError("merge of unknown node " + absorbed);
  KGNode merged = *s;
  for (const auto& f : a->facts)
    if (std::find(merged.facts.begin(), merged.facts.end(), f) == merged.facts.end())
      merged.facts.push_back(f);

  std::vector<KGEdge> rehomed;
  for (const auto& key : g.incident_edges(absorbed)) {
    KGEdge e = *g.find_edge(key);
    if (e.src == absorbed) e.src = survivor;
    if (e.dst == absorbed) e.dst = survivor;
    if (e.src != e.dst) rehomed.push_back(e);
  }
  g.remove_node(absorbed);
  g.upsert_node(std::move(merged));
  for (const auto& e : rehomed) {
    const KGEdge* existing = g.find_edge(e.key());
    if (existing && existing->confidence >= e.confidence) continue;
    g.upsert_edge(e);
  }
}

}  // namespace

KnowledgeGraph apply_batch(const KnowledgeGraph& g, const RefinementBatch& batch) {
  if (batch.base_version != g.version())
    throw StaleBatchError("refinement batch built against version " +
                          std::to_string(batch.base_version) + ", graph is at " +
                          std::to_string(g.version()));
  KnowledgeGraph next = g;
  for (const auto& p : batch.penalized) {
    const KGEdge* e = next.find_edge(p.key);
    if (!e) throw InvariantError("penalized edge missing");
    KGEdge updated = *e;
    updated.confidence = p.after;
    next.upsert_edge(updated);
  }
  for (const auto& p : batch.removed) next.remove_edge(p.key);
  for (const auto& e : batch.added) next.upsert_edge(e);
  for (const auto& [absorbed, survivor] : batch.merged) merge_into(next, absorbed, survivor);
  next.set_version(g.version() + 1);
  return next;
}

void append_audit_log(const std::filesystem::path& path, const RefinementBatch& b) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(b).dump() << "\n";
}

}  // namespace graphplay
