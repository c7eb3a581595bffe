#include "graphplay/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"
#include "graphplay/reward.hpp"
#include "graphplay/text.hpp"

namespace graphplay {

double accuracy(std::string_view candidate, std::string_view gold, double epsilon) {
  return r_answer(candidate, gold, epsilon);
}

NodePair unordered_pair(std::string_view a, std::string_view b) {
  return a <= b ? NodePair{std::string(a), std::string(b)}
                : NodePair{std::string(b), std::string(a)};
}

std::set<NodePair> pairs_from_path(std::span<const std::string> nodes) {
  std::set<NodePair> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (nodes[i] != nodes[i + 1]) out.insert(unordered_pair(nodes[i], nodes[i + 1]));
  return out;
}

double path_f1(const std::set<NodePair>& model_pairs,
               const std::set<NodePair>& kg_pairs) {
  if (kg_pairs.empty()) throw InvariantError("path_f1: empty KG pair set");
  std::size_t common = 0;
  for (const auto& p : model_pairs) common += kg_pairs.count(p);
  return 2.0 * static_cast<double>(common) /
         static_cast<double>(model_pairs.size() + kg_pairs.size());
}

std::set<NodePair> extract_model_pairs(std::string_view answer, const KnowledgeGraph& g) {
  std::vector<std::string> mentions;
  std::size_t pos = 0;
  bool sentinel = false;
  while ((pos = answer.find("[node:", pos)) != std::string_view::npos) {
    sentinel = true;
    const std::size_t end = answer.find(']', pos);
    if (end == std::string_view::npos) break;
    std::string id = text::trim(answer.substr(pos + 6, end - pos - 6));
    if (g.contains_node(id)) mentions.push_back(std::move(id));
    pos = end + 1;
  }
  if (!sentinel) {
    std::vector<std::pair<std::size_t, std::string>> hits;
    for (const auto& [id, n] : g.nodes()) {
      std::vector<std::string> aliases;
      if (std::string label = n.attr("label"); !label.empty()) aliases.push_back(label);
      if (n.type == NodeType::kConcept) aliases.push_back(n.content);
      std::size_t first = std::string_view::npos;
      for (const auto& a : aliases) {
        if (text::trim(a).empty()) continue;
        first = std::min(first, text::find_word(answer, a));
      }
      if (first != std::string_view::npos) hits.emplace_back(first, id);
    }
    std::sort(hits.begin(), hits.end());
    for (auto& h : hits) mentions.push_back(std::move(h.second));
  }
  std::set<NodePair> out;
  for (std::size_t i = 0; i + 1 < mentions.size(); ++i)
    if (mentions[i] != mentions[i + 1])
      out.insert(unordered_pair(mentions[i], mentions[i + 1]));
  return out;
}

Hallucination hallucination_rate(std::string_view candidate, std::span<const Fact> facts,
                                 double tau) {
  std::vector<double> values;
  std::set<std::string> terms;
  for (const auto& f : facts) {
    if (f.kind == FactKind::kNumeric)
      values.push_back(f.number);
    else
      terms.insert(f.term);
  }
  Hallucination h;
  const auto numbers = text::extract_numbers(candidate);
  const auto keys = text::keywords(candidate);
  h.numbers = numbers.size();
  h.terms = keys.size();
  if (!numbers.empty()) {
    std::size_t bad = 0;
    for (const auto& n : numbers) {
      double best = std::numeric_limits<double>::infinity();
      for (double v : values) best = std::min(best, relative_error(n.value, v));
      if (best > tau) ++bad;
    }
    h.halnum = static_cast<double>(bad) / static_cast<double>(numbers.size());
  }
  if (!keys.empty()) {
    std::size_t bad = 0;
    for (const auto& k : keys)
      if (!terms.count(k)) ++bad;
    h.halfact = static_cast<double>(bad) / static_cast<double>(keys.size());
  }
  h.rate = 0.5 * (h.halnum + h.halfact);
  return h;
}

Hallucination hallucination_rate(std::string_view candidate,
                                 std::span<const std::string> path_nodes,
                                 const KnowledgeGraph& g, double tau) {
  std::vector<Fact> facts;
  for (const auto& id : path_nodes)
    if (const KGNode* n = g.find_node(id))
      facts.insert(facts.end(), n->facts.begin(), n->facts.end());
  return hallucination_rate(candidate, facts, tau);
}

nlohmann::json to_json(const QAItem& item) {
  return {{"id", item.id},
          {"question", item.question},
          {"gold_answer", item.gold_answer},
          {"gold_path", item.gold_path},
          {"hop_level", item.hop_level},
          {"question_type", std::string(to_string(item.question_type))},
          {"image_refs", item.image_refs}};
}

namespace {

QAItem item_from_json(const nlohmann::json& j) {
  QAItem item;
  item.id = j.at("id").get<std::string>();
  item.question = j.at("question").get<std::string>();
  item.gold_answer = j.at("gold_answer").get<std::string>();
  item.gold_path = j.value("gold_path", std::vector<std::string>{});
  item.hop_level = j.at("hop_level").get<int>();
  auto qt = parse_question_type(j.value("question_type", std::string("Factual")));
  if (!qt) throw InvariantError("unknown question_type");
  item.question_type = *qt;
  item.image_refs = j.value("image_refs", std::vector<std::string>{});
  if (item.id.empty()) throw InvariantError("empty id");
  if (text::trim(item.question).empty()) throw InvariantError("empty question");
  if (text::normalize(item.gold_answer).empty()) throw InvariantError("empty gold_answer");
  if (item.hop_level < 1 || item.hop_level > 3)
    throw InvariantError("hop_level must be 1, 2 or 3");
  if (!item.gold_path.empty() &&
      static_cast<int>(item.gold_path.size()) - 1 != item.hop_level)
    throw InvariantError("hop_level does not match gold_path length");
  return item;
}

}  // namespace

DatasetLoad parse_dataset(std::string_view jsonl) {
  DatasetLoad out;
  std::set<std::string> ids;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    std::string where = "line " + std::to_string(lineno);
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.is_object() && j.contains("id") && j["id"].is_string())
        where += " (" + j["id"].get<std::string>() + ")";
      QAItem item = item_from_json(j);
      if (!ids.insert(item.id).second) throw InvariantError("duplicate id");
      out.items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      out.errors.push_back(where + ": " + e.what());
    } catch (const InvariantError& e) {
      out.errors.push_back(where + ": " + e.what());
    }
  }
  return out;
}

DatasetLoad load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("dataset not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

void write_dataset(const std::filesystem::path& path, std::span<const QAItem> items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& item : items) out << to_json(item).dump() << "\n";
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json hops = nlohmann::json::object();
  for (const auto& [h, m] : r.per_hop)
    hops[std::to_string(h) + "-hop"] = {{"count", m.count}, {"accuracy", m.accuracy}};
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : r.items) {
    nlohmann::json j = {{"id", it.id},
                        {"hop_level", it.hop_level},
                        {"answer", it.answer},
                        {"accuracy", it.accuracy},
                        {"halnum", it.hallucination.halnum},
                        {"halfact", it.hallucination.halfact},
                        {"hallucination_rate", it.hallucination.rate}};
    j["path_f1"] = it.path_f1 ? nlohmann::json(*it.path_f1) : nlohmann::json(nullptr);
    items.push_back(j);
  }
  return {{"count", r.count},
          {"per_hop", hops},
          {"accuracy", r.accuracy},
          {"path_f1", r.path_f1},
          {"path_f1_items", r.path_f1_items},
          {"halnum", r.halnum},
          {"halfact", r.halfact},
          {"hallucination_rate", r.hallucination_rate},
          {"items", items}};
}

std::string to_table(const MetricsReport& r) {
  auto hop = [&](int h) -> std::string {
    auto it = r.per_hop.find(h);
    if (it == r.per_hop.end() || it->second.count == 0) return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * it->second.accuracy;
    return s.str();
  };
  std::ostringstream out;
  out << std::left << std::setw(8) << "1-hop" << std::setw(8) << "2-hop"
      << std::setw(8) << "3-hop" << std::setw(10) << "Path F1" << "Halluc. Rate\n";
  out << std::setw(8) << hop(1) << std::setw(8) << hop(2) << std::setw(8) << hop(3);
  std::ostringstream f1, hr;
  f1 << std::fixed << std::setprecision(2) << r.path_f1;
  hr << std::fixed << std::setprecision(2) << 100.0 * r.hallucination_rate;
  out << std::setw(10) << f1.str() << hr.str() << "\n";
  return out.str();
}

MetricsReport evaluate_dataset(std::span<const QAItem> items, GenerationModel& model,
                               const KnowledgeGraph& g, const EvalOptions& opts) {
  MetricsReport r;
  double acc_sum = 0.0, f1_sum = 0.0, hn = 0.0, hf = 0.0, hr = 0.0;
  std::map<int, double> hop_sum;
  for (const auto& item : items) {
    GenerationRequest req;
    req.role = Role::kSolver;
    req.prompt = render_solver_prompt(item.question);
    req.image_refs = item.image_refs;
    req.n = 1;
    req.max_tokens = opts.generation.max_tokens;
    req.temperature = opts.generation.temperature;
    req.seed = fnv1a64(item.id);
    const auto replies = model.generate(req);
    if (replies.size() != 1) throw ProtocolError("evaluate: expected one candidate");

    ItemResult res;
    res.id = item.id;
    res.hop_level = item.hop_level;
    res.answer = parse_solver_response(replies.front());
    res.accuracy = accuracy(res.answer, item.gold_answer, opts.epsilon);
    if (item.gold_path.size() >= 2) {
      res.path_f1 = path_f1(extract_model_pairs(replies.front(), g),
                            pairs_from_path(item.gold_path));
      f1_sum += *res.path_f1;
      ++r.path_f1_items;
    }
    res.hallucination = hallucination_rate(res.answer, item.gold_path, g, opts.tau);

    acc_sum += res.accuracy;
    hop_sum[item.hop_level] += res.accuracy;
    ++r.per_hop[item.hop_level].count;
    hn += res.hallucination.halnum;
    hf += res.hallucination.halfact;
    hr += res.hallucination.rate;
    r.items.push_back(std::move(res));
  }
  r.count = static_cast<int>(items.size());
  if (r.count > 0) {
    const double n = r.count;
    r.accuracy = acc_sum / n;
    r.halnum = hn / n;
    r.halfact = hf / n;
    r.hallucination_rate = hr / n;
  }
  if (r.path_f1_items > 0) r.path_f1 = f1_sum / r.path_f1_items;
  for (auto& [h, m] : r.per_hop) m.accuracy = hop_sum[h] / m.count;
  return r;
}

std::vector<QAItem> generate_dataset(const KnowledgeGraph& g, GenerationModel& proposer,
                                     int per_hop, std::uint64_t seed,
                                     const TemplateSet& templates) {
  constexpr int kAttempts = 64;
  const auto weights = EdgeTypeWeights::defaults();
  std::vector<QAItem> items;
  for (int h = 1; h <= 3; ++h) {
    CurriculumState cur;
    cur.max_hops = h;
    cur.difficulty = DifficultyLevel::kFactual;
    for (int k = 0; k < per_hop; ++k) {
      for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const std::uint64_t s =
            mix64(seed ^ mix64((static_cast<std::uint64_t>(h) << 40) ^
                               (static_cast<std::uint64_t>(k) << 16) ^
                               static_cast<std::uint64_t>(attempt)));
        std::mt19937_64 rng(s);
        ReasoningPath path = sample_path(g, cur, weights, rng);
        if (static_cast<int>(path.hops()) != h) continue;
        auto outcome = propose(path, g, templates, cur.difficulty, proposer, s);
        if (!outcome.proposed) continue;
        const auto& q = *outcome.proposed;
        std::ostringstream id;
        id << "h" << h << "-" << std::setw(3) << std::setfill('0') << k;
        items.push_back({id.str(), q.question, q.gold_answer, path.nodes, h,
                         q.question_type, q.image_refs});
        break;
      }
    }
  }
  return items;
}

}  // namespace graphplay
