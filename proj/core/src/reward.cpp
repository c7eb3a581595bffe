#include "graphplay/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphplay/error.hpp"
#include "graphplay/text.hpp"

namespace graphplay {

void RewardWeights::validate() const {
  if (!(w_a >= 0.0 && w_p >= 0.0 && w_c >= 0.0))
    throw InvariantError("reward weights must be >= 0");
  if (std::abs(w_a + w_p + w_c - 1.0) > 1e-9)
    throw InvariantError("reward weights must sum to 1");
}

nlohmann::json to_json(const RewardBreakdown& b) {
  return {{"r_answer", b.r_answer},
          {"r_path", b.r_path},
          {"r_consistency", b.r_consistency},
          {"total", b.total},
          {"weights", {b.weights_used.w_a, b.weights_used.w_p, b.weights_used.w_c}}};
}

RewardBreakdown breakdown_from_json(const nlohmann::json& j) {
  RewardBreakdown b;
  b.r_answer = j.at("r_answer").get<double>();
  b.r_path = j.at("r_path").get<double>();
  b.r_consistency = j.at("r_consistency").get<double>();
  b.total = j.at("total").get<double>();
  const auto& w = j.at("weights");
  b.weights_used = {w.at(0).get<double>(), w.at(1).get<double>(),
                    w.at(2).get<double>()};
  return b;
}

double relative_error(double x, double ref) {
  if (ref == 0.0)
    return x == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(x - ref) / std::abs(ref);
}

double AnswerMatch::score() const {
  return std::max({containment, numeric, keyword_overlap});
}

AnswerMatch match_answer(std::string_view candidate, std::string_view gold,
                         double epsilon,
                         const std::set<std::string>* gold_keywords) {
  const std::string g = text::normalize(gold);
  if (g.empty()) throw InvariantError("gold answer must be non-empty");
  const std::string c = text::normalize(candidate);

  AnswerMatch m;
  m.containment = c.find(g) != std::string::npos ? 1.0 : 0.0;

  const auto gold_nums = text::extract_numbers(g);
  if (!gold_nums.empty()) {
    const double ref = gold_nums.front().value;
    for (const auto& n : text::extract_numbers(c)) {
      if (relative_error(n.value, ref) <= epsilon) {
        m.numeric = 1.0;
        break;
      }
    }
  }

  const std::set<std::string> own = gold_keywords ? std::set<std::string>{}
                                                  : text::keywords(g);
  const std::set<std::string>& kg = gold_keywords ? *gold_keywords : own;
  if (!kg.empty()) {
    const auto kc = text::keywords(c);
    std::size_t hit = 0;
    for (const auto& k : kg) hit += kc.count(k);
    m.keyword_overlap = static_cast<double>(hit) / static_cast<double>(kg.size());
  }
  return m;
}

double r_answer(std::string_view candidate, std::string_view gold,
                double epsilon, const std::set<std::string>* gold_keywords) {
  return match_answer(candidate, gold, epsilon, gold_keywords).score();
}

double r_path(std::span<const std::string> declared, const KnowledgeGraph& g) {
  if (declared.size() < 2) return 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i + 1 < declared.size(); ++i)
    if (g.has_valid_edge(declared[i], declared[i + 1])) ++valid;
  return static_cast<double>(valid) / static_cast<double>(declared.size() - 1);
}

double r_consistency(std::string_view candidate,
                     std::span<const std::string> path_nodes,
                     const KnowledgeGraph& g, double tau_num) {
  std::vector<double> numeric_facts;
  std::set<std::string> term_facts;
  for (const auto& id : path_nodes) {
    const KGNode* n = g.find_node(id);
    if (!n) continue;
    for (const auto& f : n->facts) {
      if (f.kind == FactKind::kNumeric)
        numeric_facts.push_back(f.number);
      else
        term_facts.insert(f.term);
    }
  }
  const auto numbers = text::extract_numbers(candidate);
  const auto terms = text::keywords(candidate);
  const std::size_t extracted = numbers.size() + terms.size();
  if (extracted == 0) return 1.0;

  std::size_t consistent = 0;
  for (const auto& n : numbers) {
    bool ok = std::any_of(numeric_facts.begin(), numeric_facts.end(),
                          [&](double f) { return relative_error(n.value, f) <= tau_num; });
    if (ok) ++consistent;
  }
  for (const auto& t : terms)
    if (term_facts.count(t)) ++consistent;
  return static_cast<double>(consistent) / static_cast<double>(extracted);
}

double r_consistency(std::string_view candidate, const ReasoningPath& path,
                     const KnowledgeGraph& g, double tau_num) {
  return r_consistency(candidate, path.nodes, g, tau_num);
}

double total_reward(double ra, double rp, double rc, const RewardWeights& w) {
  w.validate();
  for (double x : {ra, rp, rc})
    if (!(x >= 0.0 && x <= 1.0))
      throw InvariantError("reward component outside [0,1]");
  return std::clamp(w.w_a * ra + w.w_p * rp + w.w_c * rc, 0.0, 1.0);
}

RewardBreakdown make_breakdown(double ra, double rp, double rc,
                               const RewardWeights& w) {
  return {ra, rp, rc, total_reward(ra, rp, rc, w), w};
}

RewardWeights anneal_weights(const AnnealSchedule& sched, int epoch) {
  double t = 1.0;
  if (sched.total_epochs > 1)
    t = static_cast<double>(epoch) / static_cast<double>(sched.total_epochs - 1);
  t = std::clamp(t, 0.0, 1.0);
  if (t == 0.0) return sched.initial;
  if (t == 1.0) return sched.final_weights;
  const auto& a = sched.initial;
  const auto& b = sched.final_weights;
  RewardWeights w{a.w_a + t * (b.w_a - a.w_a), a.w_p + t * (b.w_p - a.w_p),
                  a.w_c + t * (b.w_c - a.w_c)};
  const double sum = w.w_a + w.w_p + w.w_c;
  if (std::abs(sum - 1.0) <= 1e-12) return w;
  w.w_a /= sum;
  w.w_p /= sum;
  w.w_c /= sum;
  return w;
}

}  // namespace graphplay
