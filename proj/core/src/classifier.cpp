#include "graphplay/classifier.hpp"

#include <array>

#include "graphplay/error.hpp"
#include "graphplay/text.hpp"
#include "http_client.hpp"

namespace graphplay {

namespace {
constexpr std::array<std::string_view, 6> kLabelNames = {
    "Illustrates", "Supports", "Contradicts", "DerivesFrom", "Compares", "None"};

bool mentions_any(std::string_view haystack,
                  std::initializer_list<std::string_view> cues) {
  for (auto cue : cues)
    if (text::find_word(haystack, cue) != std::string_view::npos) return true;
  return false;
}
}  // namespace

std::string_view to_string(RelationLabel l) {
  return kLabelNames[static_cast<std::size_t>(l)];
}

std::optional<RelationLabel> parse_relation_label(std::string_view s) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (kLabelNames[i] == s) return static_cast<RelationLabel>(i);
  return std::nullopt;
}

std::optional<EdgeType> to_edge_type(RelationLabel l) {
  switch (l) {
    case RelationLabel::kIllustrates: return EdgeType::kIllustrates;
    case RelationLabel::kSupports: return EdgeType::kSupports;
    case RelationLabel::kContradicts: return EdgeType::kContradicts;
    case RelationLabel::kDerivesFrom: return EdgeType::kDerivesFrom;
    case RelationLabel::kCompares: return EdgeType::kCompares;
    case RelationLabel::kNone: return std::nullopt;
  }
  return std::nullopt;
}

RelationVerdict CueWordClassifier::classify(const KGNode& src,
                                            const KGNode& dst) {
  const std::string both = src.content + " " + dst.content;
  if (mentions_any(both, {"contradict", "contradicts", "however", "in contrast",
                          "fails", "fail", "unlike", "degrades", "worse"}))
    return {RelationLabel::kContradicts, confidence_};
  if (mentions_any(both, {"compared", "compare", "outperforms", "versus", "vs"}))
    return {RelationLabel::kCompares, confidence_};
  switch (dst.type) {
    case NodeType::kFigure: return {RelationLabel::kIllustrates, confidence_};
    case NodeType::kEquation: return {RelationLabel::kDerivesFrom, confidence_};
    default: return {RelationLabel::kSupports, confidence_};
  }
}

void ScriptedClassifier::set(std::string src, std::string dst,
                             RelationVerdict verdict) {
  table_[{std::move(src), std::move(dst)}] = verdict;
}

RelationVerdict ScriptedClassifier::classify(const KGNode& src,
                                             const KGNode& dst) {
  ++calls_;
  auto it = table_.find({src.node_id, dst.node_id});
  if (it != table_.end()) return it->second;
  if (fallback_) return fallback_->classify(src, dst);
  return {};
}

std::unique_ptr<ScriptedClassifier> ScriptedClassifier::from_json(
    const nlohmann::json& j) {
  std::unique_ptr<RelationClassifier> fallback;
  const std::string mode = j.value("fallback", std::string("none"));
  if (mode == "cue")
    fallback = std::make_unique<CueWordClassifier>();
  else if (mode != "none")
    throw ConfigError("classifier script: unknown fallback '" + mode + "'");
  auto out = std::make_unique<ScriptedClassifier>(std::move(fallback));
  if (j.contains("pairs")) {
    for (const auto& p : j.at("pairs")) {
      auto label = parse_relation_label(p.at("label").get<std::string>());
      if (!label)
        throw ConfigError("classifier script: unknown label " +
                          p.at("label").dump());
      double conf = p.value("confidence", 0.7);
      if (!(conf >= 0.0 && conf <= 1.0))
        throw ConfigError("classifier script: confidence outside [0,1]");
      out->set(p.at("src").get<std::string>(), p.at("dst").get<std::string>(),
               {*label, conf});
    }
  }
  return out;
}

HttpClassifier::HttpClassifier(std::string endpoint_url, int max_attempts,
                               int timeout_seconds)
    : url_(std::move(endpoint_url)),
      max_attempts_(std::max(1, max_attempts)),
      timeout_seconds_(timeout_seconds) {}

RelationVerdict HttpClassifier::classify(const KGNode& src, const KGNode& dst) {
  nlohmann::json labels = nlohmann::json::array();
  for (auto name : kLabelNames) labels.push_back(name);
  const nlohmann::json body{{"src_text", src.content},
                            {"dst_text", dst.content},
                            {"labels", labels}};
  nlohmann::json response;
  for (int attempt = 1;; ++attempt) {
    try {
      response = detail::post_json(url_, "/v1/classify-relation", body,
                                   timeout_seconds_);
      break;
    } catch (const EndpointError&) {
      if (attempt >= max_attempts_) throw;
    }
  }
  if (!response.contains("label") || !response["label"].is_string())
    throw ProtocolError("/v1/classify-relation: missing 'label'");
  auto label = parse_relation_label(response["label"].get<std::string>());
  if (!label)
    throw ProtocolError("/v1/classify-relation: label outside closed set: " +
                        response["label"].get<std::string>());
  double conf = response.value("confidence", 0.0);
  if (!(conf >= 0.0 && conf <= 1.0))
    throw ProtocolError("/v1/classify-relation: confidence outside [0,1]");
  return {*label, conf};
}

}  // namespace graphplay
