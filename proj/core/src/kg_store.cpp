#include "graphplay/kg_store.hpp"

#include <algorithm>
#include <cmath>

#include "graphplay/error.hpp"

namespace graphplay {

namespace {
constexpr std::array<std::string_view, 6> kNodeTypeNames = {
    "TextBlock", "Figure", "Table", "Equation", "Concept", "Claim"};
constexpr std::array<std::string_view, kEdgeTypeCount> kEdgeTypeNames = {
    "Contains",   "HasCaption",  "References",  "Illustrates",
    "Quantifies", "Defines",     "Supports",    "Contradicts",
    "DerivesFrom", "Compares",   "SameConcept"};
}  // namespace

std::string_view to_string(NodeType t) {
  return kNodeTypeNames[static_cast<std::size_t>(t)];
}
std::string_view to_string(EdgeType t) {
  return kEdgeTypeNames[static_cast<std::size_t>(t)];
}

std::optional<NodeType> parse_node_type(std::string_view s) {
  for (std::size_t i = 0; i < kNodeTypeNames.size(); ++i)
    if (kNodeTypeNames[i] == s) return static_cast<NodeType>(i);
  return std::nullopt;
}

std::optional<EdgeType> parse_edge_type(std::string_view s) {
  for (std::size_t i = 0; i < kEdgeTypeNames.size(); ++i)
    if (kEdgeTypeNames[i] == s) return static_cast<EdgeType>(i);
  return std::nullopt;
}

EdgeTypeSet structural_edge_types() {
  return {EdgeType::kContains, EdgeType::kHasCaption};
}
EdgeTypeSet reference_edge_types() { return {EdgeType::kReferences}; }
EdgeTypeSet semantic_edge_types() {
  return {EdgeType::kIllustrates, EdgeType::kSupports, EdgeType::kContradicts,
          EdgeType::kDerivesFrom, EdgeType::kCompares};
}

std::string KGNode::attr(std::string_view key) const {
  auto it = attrs.find(std::string(key));
  return it == attrs.end() ? std::string() : it->second;
}

std::string to_string(const EdgeKey& key) {
  return key.src + " -" + std::string(to_string(key.type)) + "-> " + key.dst;
}

void KnowledgeGraph::upsert_node(KGNode node) {
  if (node.node_id.empty()) throw InvariantError("node with empty id");
  if ((node.type == NodeType::kConcept || node.type == NodeType::kClaim) &&
      node.content.empty())
    throw InvariantError("node " + node.node_id +
                         ": Concept/Claim nodes need content");
  for (const auto& f : node.facts)
    if (f.kind == FactKind::kNumeric && !std::isfinite(f.number))
      throw InvariantError("node " + node.node_id + ": non-finite numeric fact");
  if (node.embedding)
    for (double x : *node.embedding)
      if (!std::isfinite(x))
        throw InvariantError("node " + node.node_id + ": non-finite embedding");
  std::string id = node.node_id;
  nodes_.insert_or_assign(std::move(id), std::move(node));
}

void KnowledgeGraph::upsert_edge(const KGEdge& edge) {
  if (!(edge.confidence >= 0.0 && edge.confidence <= 1.0))
    throw InvariantError("edge " + to_string(edge.key()) +
                         ": confidence outside [0,1]");
  if (edge.src == edge.dst)
    throw InvariantError("self-loop on " + edge.src);
  if (!contains_node(edge.src))
    throw InvariantError("dangling edge source " + edge.src);
  if (!contains_node(edge.dst))
    throw InvariantError("dangling edge target " + edge.dst);
  EdgeKey key = edge.key();
  out_[edge.src].insert(key);
  in_[edge.dst].insert(key);
  edges_.insert_or_assign(std::move(key), edge);
}

bool KnowledgeGraph::remove_edge(const EdgeKey& key) {
  auto it = edges_.find(key);
  if (it == edges_.end()) return false;
  edges_.erase(it);
  if (auto o = out_.find(key.src); o != out_.end()) {
    o->second.erase(key);
    if (o->second.empty()) out_.erase(o);
  }
  if (auto i = in_.find(key.dst); i != in_.end()) {
    i->second.erase(key);
    if (i->second.empty()) in_.erase(i);
  }
  return true;
}

bool KnowledgeGraph::remove_node(std::string_view node_id) {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) return false;
  for (const auto& key : incident_edges(node_id)) remove_edge(key);
  nodes_.erase(it);
  return true;
}

double KnowledgeGraph::adjust_confidence(const EdgeKey& key, double delta) {
  auto it = edges_.find(key);
  if (it == edges_.end())
    throw NotFoundError("no edge " + to_string(key));
  it->second.confidence = std::clamp(it->second.confidence + delta, 0.0, 1.0);
  return it->second.confidence;
}

const KGNode* KnowledgeGraph::find_node(std::string_view node_id) const {
  auto it = nodes_.find(node_id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const KGNode& KnowledgeGraph::node(std::string_view node_id) const {
  const KGNode* n = find_node(node_id);
  if (!n) throw NotFoundError("unknown node " + std::string(node_id));
  return *n;
}

const KGEdge* KnowledgeGraph::find_edge(const EdgeKey& key) const {
  auto it = edges_.find(key);
  return it == edges_.end() ? nullptr : &it->second;
}

bool KnowledgeGraph::has_valid_edge(std::string_view u,
                                    std::string_view v) const {
  auto check = [&](std::string_view a, std::string_view b) {
    auto o = out_.find(a);
    if (o == out_.end()) return false;
    for (const auto& key : o->second) {
      if (key.dst == b && edges_.at(key).confidence >= floor_) return true;
    }
    return false;
  };
  return check(u, v) || check(v, u);
}

std::vector<EdgeKey> KnowledgeGraph::incident_edges(std::string_view u) const {
  std::vector<EdgeKey> out;
  if (auto o = out_.find(u); o != out_.end())
    out.insert(out.end(), o->second.begin(), o->second.end());
  if (auto i = in_.find(u); i != in_.end())
    out.insert(out.end(), i->second.begin(), i->second.end());
  return out;
}

std::vector<Neighbor> KnowledgeGraph::neighbors(std::string_view u,
                                                const EdgeTypeSet& filter) const {
  if (!contains_node(u))
    throw NotFoundError("unknown node " + std::string(u));
  std::vector<Neighbor> out;
  if (auto o = out_.find(u); o != out_.end()) {
    for (const auto& key : o->second) {
      if (!filter.contains(key.type)) continue;
      out.push_back({edges_.at(key), &nodes_.find(key.dst)->second, true});
    }
  }
  if (auto i = in_.find(u); i != in_.end()) {
    for (const auto& key : i->second) {
      if (!filter.contains(key.type)) continue;
      out.push_back({edges_.at(key), &nodes_.find(key.src)->second, false});
    }
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.node->node_id != b.node->node_id)
      return a.node->node_id < b.node->node_id;
    if (a.edge.type != b.edge.type) return a.edge.type < b.edge.type;
    return a.forward && !b.forward;
  });
  return out;
}

std::size_t KnowledgeGraph::edge_count(EdgeType t) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(),
                    [t](const auto& kv) { return kv.first.type == t; }));
}

}  // namespace graphplay
