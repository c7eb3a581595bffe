#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

#include "graphplay/kg_store.hpp"

namespace graphplay {

// Closed label set of the semantic relation stage, plus None.
enum class RelationLabel {
  kIllustrates,
  kSupports,
  kContradicts,
  kDerivesFrom,
  kCompares,
  kNone,
};

std::string_view to_string(RelationLabel l);
std::optional<RelationLabel> parse_relation_label(std::string_view s);
std::optional<EdgeType> to_edge_type(RelationLabel l);

struct RelationVerdict {
  RelationLabel label = RelationLabel::kNone;
  double confidence = 0.0;
};

struct RelationClassification {
  std::pair<std::string, std::string> pair;
  RelationLabel label = RelationLabel::kNone;
  double confidence = 0.0;
};

class RelationClassifier {
 public:
  virtual ~RelationClassifier() = default;
  virtual RelationVerdict classify(const KGNode& src, const KGNode& dst) = 0;
};

// Deterministic cue-word rules over the two node contents. Used when no
// endpoint or script is configured.
class CueWordClassifier final : public RelationClassifier {
 public:
  explicit CueWordClassifier(double confidence = 0.7) : confidence_(confidence) {}
  RelationVerdict classify(const KGNode& src, const KGNode& dst) override;

 private:
  double confidence_;
};

// Pair -> verdict table keyed by (src node id, dst node id). Unlisted pairs go
// to the fallback classifier, or get None when there is none.
class ScriptedClassifier final : public RelationClassifier {
 public:
  explicit ScriptedClassifier(std::unique_ptr<RelationClassifier> fallback = nullptr)
      : fallback_(std::move(fallback)) {}

  void set(std::string src, std::string dst, RelationVerdict verdict);
  RelationVerdict classify(const KGNode& src, const KGNode& dst) override;
  std::size_t calls() const { return calls_; }

  // {"pairs":[{"src","dst","label","confidence"}], "fallback":"cue"|"none"}
  static std::unique_ptr<ScriptedClassifier> from_json(const nlohmann::json& j);

 private:
  std::map<std::pair<std::string, std::string>, RelationVerdict> table_;
  std::unique_ptr<RelationClassifier> fallback_;
  std::size_t calls_ = 0;
};

// POST {endpoint}/v1/classify-relation with {"src_text","dst_text","labels"};
// expects {"label","confidence"}. Endpoint failures are retried; a label
// outside the closed set is a ProtocolError.
class HttpClassifier final : public RelationClassifier {
 public:
  HttpClassifier(std::string endpoint_url, int max_attempts = 3,
                 int timeout_seconds = 60);
  RelationVerdict classify(const KGNode& src, const KGNode& dst) override;

 private:
  std::string url_;
  int max_attempts_;
  int timeout_seconds_;
};

}  // namespace graphplay
