#pragma once

#include <array>
#include <bitset>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace graphplay {

enum class NodeType { kTextBlock, kFigure, kTable, kEquation, kConcept, kClaim };

enum class EdgeType {
  kContains,
  kHasCaption,
  kReferences,
  kIllustrates,
  kQuantifies,
  kDefines,
  kSupports,
  kContradicts,
  kDerivesFrom,
  kCompares,
  kSameConcept,
};

inline constexpr std::size_t kEdgeTypeCount = 11;

inline constexpr std::array<EdgeType, kEdgeTypeCount> kAllEdgeTypes = {
    EdgeType::kContains,    EdgeType::kHasCaption,  EdgeType::kReferences,
    EdgeType::kIllustrates, EdgeType::kQuantifies,  EdgeType::kDefines,
    EdgeType::kSupports,    EdgeType::kContradicts, EdgeType::kDerivesFrom,
    EdgeType::kCompares,    EdgeType::kSameConcept,
};

std::string_view to_string(NodeType t);
std::string_view to_string(EdgeType t);
std::optional<NodeType> parse_node_type(std::string_view s);
std::optional<EdgeType> parse_edge_type(std::string_view s);

// Small value set of edge types.
class EdgeTypeSet {
 public:
  EdgeTypeSet() = default;
  EdgeTypeSet(std::initializer_list<EdgeType> types) {
    for (auto t : types) insert(t);
  }
  static EdgeTypeSet all() {
    EdgeTypeSet s;
    s.bits_.set();
    return s;
  }
  void insert(EdgeType t) { bits_.set(static_cast<std::size_t>(t)); }
  bool contains(EdgeType t) const {
    return bits_.test(static_cast<std::size_t>(t));
  }
  bool empty() const { return bits_.none(); }
  friend bool operator==(const EdgeTypeSet&, const EdgeTypeSet&) = default;

 private:
  std::bitset<kEdgeTypeCount> bits_;
};

// Edge types produced by each construction stage.
EdgeTypeSet structural_edge_types();
EdgeTypeSet reference_edge_types();
EdgeTypeSet semantic_edge_types();

enum class FactKind { kNumeric, kTerm };

struct Fact {
  FactKind kind = FactKind::kTerm;
  double number = 0.0;  // kNumeric
  std::string term;     // kTerm
  std::string context;

  static Fact numeric(double v, std::string context = {}) {
    return Fact{FactKind::kNumeric, v, {}, std::move(context)};
  }
  static Fact term_fact(std::string t, std::string context = {}) {
    return Fact{FactKind::kTerm, 0.0, std::move(t), std::move(context)};
  }

  friend bool operator==(const Fact&, const Fact&) = default;
};

struct KGNode {
  std::string node_id;
  NodeType type = NodeType::kTextBlock;
  std::string doc_id;
  std::string content;
  std::vector<Fact> facts;
  std::optional<std::vector<double>> embedding;
  // Construction metadata: block_id, label, image_ref, section_path, role.
  std::map<std::string, std::string> attrs;

  std::string attr(std::string_view key) const;

  friend bool operator==(const KGNode&, const KGNode&) = default;
};

struct EdgeKey {
  std::string src;
  std::string dst;
  EdgeType type = EdgeType::kContains;

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

std::string to_string(const EdgeKey& key);

struct KGEdge {
  std::string src;
  std::string dst;
  EdgeType type = EdgeType::kContains;
  double confidence = 1.0;

  EdgeKey key() const { return {src, dst, type}; }
  friend bool operator==(const KGEdge&, const KGEdge&) = default;
};

// One incident edge seen from a node. `forward` is true when the edge is
// stored as (from -> node).
struct Neighbor {
  KGEdge edge;
  const KGNode* node = nullptr;
  bool forward = true;
};

// Typed multimodal graph with confidence-weighted typed edges. Edges are
// stored directed; validity (`has_valid_edge`) is tested undirected and gated
// by the confidence floor.
class KnowledgeGraph {
 public:
  static constexpr double kDefaultValidityFloor = 0.15;

  // Replaces any node with the same id. Incident edges are kept.
  void upsert_node(KGNode node);
  // Inserts or replaces the confidence of the (src, dst, type) edge.
  void upsert_edge(const KGEdge& edge);
  bool remove_edge(const EdgeKey& key);
  // Removes the node and every incident edge.
  bool remove_node(std::string_view node_id);
  // Adds `delta` to the edge confidence, clamped to [0, 1]. Returns the new
  // confidence.
  double adjust_confidence(const EdgeKey& key, double delta);

  const KGNode* find_node(std::string_view node_id) const;
  const KGNode& node(std::string_view node_id) const;
  const KGEdge* find_edge(const EdgeKey& key) const;
  bool contains_node(std::string_view node_id) const {
    return find_node(node_id) != nullptr;
  }

  // True iff some edge of any type links u and v in either direction with
  // confidence >= validity_floor(). Unknown ids give false.
  bool has_valid_edge(std::string_view u, std::string_view v) const;
  bool is_valid(const KGEdge& e) const { return e.confidence >= floor_; }

  // Incident edges in both directions, sorted by neighbor id, then edge type,
  // then forward before backward. Throws NotFoundError for unknown u.
  std::vector<Neighbor> neighbors(std::string_view u,
                                  const EdgeTypeSet& filter = EdgeTypeSet::all()) const;
  std::vector<EdgeKey> incident_edges(std::string_view u) const;

  const std::map<std::string, KGNode, std::less<>>& nodes() const { return nodes_; }
  const std::map<EdgeKey, KGEdge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t edge_count(EdgeType t) const;

  double validity_floor() const { return floor_; }
  void set_validity_floor(double floor) { floor_ = floor; }

  // Bumped by every refinement batch; stale batches are rejected by version.
  std::uint64_t version() const { return version_; }
  void set_version(std::uint64_t v) { version_ = v; }

  const std::string& corpus_hash() const { return corpus_hash_; }
  void set_corpus_hash(std::string h) { corpus_hash_ = std::move(h); }

  // Content equality: nodes, edges and corpus hash.
  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ &&
           a.corpus_hash_ == b.corpus_hash_;
  }

 private:
  std::map<std::string, KGNode, std::less<>> nodes_;
  std::map<EdgeKey, KGEdge> edges_;
  std::map<std::string, std::set<EdgeKey>, std::less<>> out_;
  std::map<std::string, std::set<EdgeKey>, std::less<>> in_;
  double floor_ = kDefaultValidityFloor;
  std::uint64_t version_ = 0;
  std::string corpus_hash_;
};

// JSON mapping used by snapshots and by exports.
nlohmann::json to_json(const KGNode& node);
nlohmann::json to_json(const KGEdge& edge);
KGNode node_from_json(const nlohmann::json& j);
KGEdge edge_from_json(const nlohmann::json& j);

inline constexpr int kSnapshotSchemaVersion = 1;

// Snapshot directory: nodes.jsonl, edges.jsonl (sorted by id / key) and
// manifest.json. Byte-identical for equal graphs.
void save_snapshot(const KnowledgeGraph& g, const std::filesystem::path& dir);
KnowledgeGraph load_snapshot(const std::filesystem::path& dir);

}  // namespace graphplay
