#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/classifier.hpp"
#include "graphplay/corpus_ir.hpp"
#include "graphplay/embed.hpp"
#include "graphplay/kg_store.hpp"

namespace graphplay {

struct ConstructConfig {
  double tau_semantic = 0.75;  // inclusive
  int max_edges_per_node = 10;
  double tau_cross = 0.85;  // strict
  std::vector<std::string> reference_patterns = default_reference_patterns();
  int concept_min_freq = 2;
  double reference_confidence = 0.9;
  double extraction_confidence = 0.6;

  static std::vector<std::string> default_reference_patterns();
  void validate() const;
};

struct ConstructionFinding {
  std::string kind;  // DanglingReference, ClassifierSkipped, ...
  std::string doc_id;
  std::string node_id;
  std::string detail;
};

struct ConstructionReport {
  std::vector<ConstructionFinding> findings;
  std::vector<RelationClassification> classified;
  std::size_t classifier_calls = 0;

  nlohmann::json to_json() const;
};

// Node id conventions. Ids are doc-prefixed so they stay unique after
// federation.
std::string block_node_id(std::string_view doc_id, std::string_view block_id);
std::string caption_node_id(std::string_view doc_id, std::string_view block_id);
std::string heading_node_id(std::string_view doc_id, std::string_view section_id);

// Lexical facts of a piece of node content: numbers and content keywords.
std::vector<Fact> lexical_facts(std::string_view content, std::string_view context);

// Stage 1: one node per block, heading surrogates for titled sections,
// Contains edges for the section hierarchy and HasCaption edges from figures
// and tables to their caption nodes. Every edge has confidence 1.0.
KnowledgeGraph build_structural(const DocumentIR& doc);

// Stage 2: cross-reference patterns in text blocks become References edges
// to the labelled figure/table/equation (or numbered section heading).
// Unresolved references are reported, never linked.
void build_reference(const DocumentIR& doc, KnowledgeGraph& g,
                     const ConstructConfig& cfg, ConstructionReport& report);

// Fallback Concept/Claim extractor. Concepts are closed frequent phrases
// (content-word n-grams up to 3 and capitalized multi-word spans) with
// frequency >= concept_min_freq, linked TextBlock -Defines-> Concept.
// Sentences with comparative or assertive cues become Claims linked
// Claim -DerivesFrom-> TextBlock.
void extract_concepts(const DocumentIR& doc, KnowledgeGraph& g,
                      const ConstructConfig& cfg);

// Stage 3: same-document candidate pairs with cosine >= tau_semantic, ranked
// globally by similarity (ties by id pair), each node capped at
// max_edges_per_node semantic edges; the classifier labels the survivors.
void build_semantic(KnowledgeGraph& g, Embedder& embedder,
                    RelationClassifier& classifier, const ConstructConfig& cfg,
                    ConstructionReport* report = nullptr);

// Stages 1-3 plus concept extraction for one document.
KnowledgeGraph build_document_graph(const DocumentIR& doc, Embedder& embedder,
                                    RelationClassifier& classifier,
                                    const ConstructConfig& cfg,
                                    ConstructionReport& report);

// Union of the inputs plus SameConcept edges (confidence = cosine) between
// cross-document Concept/Claim/TextBlock nodes with cosine > tau_cross.
// Throws InvariantError on a node id shared by two inputs.
KnowledgeGraph federate(std::span<const KnowledgeGraph> graphs,
                        Embedder& embedder, double tau_cross);

}  // namespace graphplay
