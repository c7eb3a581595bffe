#include "graphplay/selfplay.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <numeric>

#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"
#include "graphplay/text.hpp"

namespace graphplay {

std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::kFactual: return "Factual";
    case QuestionType::kComparative: return "Comparative";
    case QuestionType::kCausal: return "Causal";
    case QuestionType::kSynthesis: return "Synthesis";
  }
  return "?";
}

std::optional<QuestionType> parse_question_type(std::string_view s) {
  for (auto t : {QuestionType::kFactual, QuestionType::kComparative,
                 QuestionType::kCausal, QuestionType::kSynthesis})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

QuestionType classify_question(const ReasoningPath& path) {
  if (path.contains_type(EdgeType::kCompares) ||
      path.contains_type(EdgeType::kContradicts))
    return QuestionType::kComparative;
  if (path.hops() > 1) return QuestionType::kSynthesis;
  if (path.contains_type(EdgeType::kSupports) ||
      path.contains_type(EdgeType::kDerivesFrom))
    return QuestionType::kCausal;
  return QuestionType::kFactual;
}

GoldAnswer extract_gold(const KGNode& n) {
  GoldAnswer gold;
  switch (n.type) {
    case NodeType::kTable:
      for (const auto& f : n.facts) {
        if (f.kind == FactKind::kNumeric && f.context.find(" | ") != std::string::npos) {
          gold.text = text::format_number(f.number);
          gold.cell = f.context;
          return gold;
        }
      }
      gold.text = text::first_sentence(n.content);
      break;
    case NodeType::kFigure:
      gold.text = text::trim(n.content);
      if (gold.text.empty()) gold.text = n.attr("label");
      break;
    case NodeType::kEquation: {
      gold.text = n.attr("label");
      if (gold.text.empty()) {
        const std::string c = text::trim(n.content);
        gold.text = text::trim(c.substr(0, c.find('\n')));
      }
      break;
    }
    default:
      gold.text = text::first_sentence(n.content);
      break;
  }
  gold.text = text::trim(gold.text);
  return gold;
}

namespace {

std::vector<std::string> path_images(const ReasoningPath& path, const KnowledgeGraph& g) {
  std::vector<std::string> refs;
  for (const auto& id : path.nodes) {
    const KGNode& n = g.node(id);
    if (n.type != NodeType::kFigure && n.type != NodeType::kTable) continue;
    std::string ref = n.attr("image_ref");
    if (!ref.empty() && std::find(refs.begin(), refs.end(), ref) == refs.end())
      refs.push_back(std::move(ref));
  }
  return refs;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

ProposeOutcome propose(const ReasoningPath& path, const KnowledgeGraph& g,
                       const TemplateSet& templates, DifficultyLevel difficulty,
                       GenerationModel& model, std::uint64_t seed,
                       const GenerationSettings& settings) {
  ProposeOutcome out;
  if (path.edges.empty()) {
    out.finding = "path has no edges";
    return out;
  }
  const GoldAnswer gold = extract_gold(g.node(path.terminal()));
  if (gold.text.empty()) {
    out.finding = "terminal node " + path.terminal() + " yields no gold answer";
    return out;
  }
  const std::string tmpl = render_template(templates, path, g, difficulty, gold.cell);

  GenerationRequest req;
  req.role = Role::kProposer;
  req.prompt = render_proposer_prompt(path, g, tmpl, difficulty, gold.text);
  req.image_refs = path_images(path, g);
  req.n = 1;
  req.max_tokens = settings.max_tokens;
  req.temperature = settings.temperature;
  req.seed = seed;

  std::optional<ParsedProposal> parsed;
  for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
    if (attempt == 1) req.prompt += repair_instruction();
    ++out.attempts;
    auto replies = model.generate(req);
    if (replies.empty()) throw ProtocolError("proposer returned no candidates");
    parsed = parse_proposer_response(replies.front());
  }
  if (!parsed) {
    out.finding = "unparseable proposer output after repair retry";
    return out;
  }

  ProposedQuestion q;
  q.question = parsed->question;
  q.gold_answer = gold.text;
  q.path = path;
  q.declared_path = parsed->path;
  q.question_type = classify_question(path);
  q.image_refs = req.image_refs;
  q.difficulty = difficulty;
  out.proposed = std::move(q);
  return out;
}

SolverCall solve(const ProposedQuestion& q, GenerationModel& model, int group_size,
                 std::uint64_t seed, bool batch, const GenerationSettings& settings) {
  if (group_size < 1) throw InvariantError("group size must be >= 1");
  SolverCall call;
  call.prompt = render_solver_prompt(q.question);
  call.image_refs = q.image_refs;

  GenerationRequest req;
  req.role = Role::kSolver;
  req.prompt = call.prompt;
  req.image_refs = call.image_refs;
  req.max_tokens = settings.max_tokens;
  req.temperature = settings.temperature;
  if (batch) {
    req.n = group_size;
    req.seed = seed;
    call.raw = model.generate(req);
  } else {
    req.n = 1;
    for (int i = 0; i < group_size; ++i) {
      req.seed = seed + static_cast<std::uint64_t>(i);
      auto r = model.generate(req);
      if (r.size() != 1) throw ProtocolError("solver returned wrong candidate count");
      call.raw.push_back(std::move(r.front()));
    }
  }
  if (call.raw.size() != static_cast<std::size_t>(group_size))
    throw ProtocolError("solver returned " + std::to_string(call.raw.size()) +
                        " candidates, expected " + std::to_string(group_size));
  return call;
}

std::vector<double> compute_advantages(std::span<const double> rewards) {
  if (rewards.empty()) throw InvariantError("advantages of an empty group");
  const double m = mean_of(rewards);
  std::vector<double> adv;
  adv.reserve(rewards.size());
  for (double r : rewards) adv.push_back(r - m);
  return adv;
}

void SelfPlayConfig::validate() const {
  if (questions_per_epoch < 0) throw ConfigError("questions_per_epoch must be >= 0");
  if (group_size < 1) throw ConfigError("group_size must be >= 1");
  if (generation.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (!(generation.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (!(epsilon >= 0.0) || !(tau_num >= 0.0))
    throw ConfigError("tolerances must be >= 0");
  if (!(retention_threshold >= 0.0 && retention_threshold <= 1.0))
    throw ConfigError("retention_threshold must lie in [0,1]");
  if (minibatch_every < 1) throw ConfigError("minibatch_every must be >= 1");
  edge_weights.validate();
}

std::string_view to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::kOk: return "ok";
    case EpisodeStatus::kSkipped: return "skipped";
    case EpisodeStatus::kFailed: return "failed";
  }
  return "?";
}

std::size_t QAEpisode::best_candidate() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rewards.size(); ++i)
    if (rewards[i].total > rewards[best].total) best = i;
  return best;
}

double QAEpisode::max_total() const {
  double m = 0.0;
  for (const auto& r : rewards) m = std::max(m, r.total);
  return m;
}

double proposer_reward(double r_path_declared, double mean_r_answer,
                       const RewardWeights& w) {
  const double difficulty = 1.0 - std::abs(mean_r_answer - 0.5) * 2.0;
  return w.w_p * r_path_declared + w.w_c * difficulty;
}

nlohmann::json to_json(const EpochStats& s) {
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [t, a] : s.per_type_accuracy) acc[std::string(to_string(t))] = a;
  nlohmann::json cnt = nlohmann::json::object();
  for (const auto& [t, c] : s.per_type_episodes) cnt[std::string(to_string(t))] = c;
  nlohmann::json mb = nlohmann::json::array();
  for (const auto& m : s.minibatches)
    mb.push_back({{"ordinal", m.ordinal}, {"episodes", m.episode_indices}});
  return {{"epoch", s.epoch},
          {"max_hops", s.max_hops},
          {"difficulty", std::string(to_string(s.difficulty))},
          {"weights", {s.weights.w_a, s.weights.w_p, s.weights.w_c}},
          {"attempted", s.attempted},
          {"ok", s.ok},
          {"skipped", s.skipped},
          {"failed", s.failed},
          {"kept", s.kept},
          {"per_type_accuracy", acc},
          {"per_type_episodes", cnt},
          {"mean_r_answer", s.mean_r_answer},
          {"mean_total_reward", s.mean_total_reward},
          {"proposer_credit_mean", s.proposer_credit_mean},
          {"proposer_credit_sum", s.proposer_credit_sum},
          {"mean_proposer_reward", s.mean_proposer_reward},
          {"minibatches", mb},
          {"findings", s.findings}};
}

namespace {

QAEpisode run_episode(const KnowledgeGraph& g, const CurriculumState& cur,
                      const SelfPlayConfig& cfg, const RewardWeights& w,
                      GenerationModel& model, std::uint64_t epoch_seed, int index) {
  QAEpisode e;
  e.epoch = cur.epoch;
  e.index = index;
  e.seed = mix64(epoch_seed ^ static_cast<std::uint64_t>(index));
  std::mt19937_64 rng(e.seed);

  ReasoningPath path;
  try {
    path = sample_path(g, cur, cfg.edge_weights, rng, {cfg.excluded_edges});
  } catch (const NoPathAvailable& ex) {
    e.status = EpisodeStatus::kSkipped;
    e.finding = ex.what();
    return e;
  }

  try {
    auto outcome = propose(path, g, cfg.templates, cur.difficulty, model, e.seed,
                           cfg.generation);
    if (!outcome.proposed) {
      e.status = EpisodeStatus::kSkipped;
      e.finding = outcome.finding;
      e.proposed.path = path;
      return e;
    }
    e.proposed = std::move(*outcome.proposed);
    e.solver = solve(e.proposed, model, cfg.group_size, mix64(e.seed),
                     cfg.batch_solver, cfg.generation);
  } catch (const EndpointError& ex) {
    e.status = EpisodeStatus::kFailed;
    e.finding = ex.what();
    return e;
  } catch (const ProtocolError& ex) {
    e.status = EpisodeStatus::kFailed;
    e.finding = ex.what();
    return e;
  }

  const double rp = r_path(e.proposed.declared_path, g);
  std::vector<double> totals, answers;
  for (const auto& raw : e.solver.raw) {
    e.answers.push_back(parse_solver_response(raw));
    const double ra = r_answer(e.answers.back(), e.proposed.gold_answer, cfg.epsilon);
    const double rc = r_consistency(e.answers.back(), e.proposed.path, g, cfg.tau_num);
    e.rewards.push_back(make_breakdown(ra, rp, rc, w));
    totals.push_back(e.rewards.back().total);
    answers.push_back(ra);
  }
  e.advantages = compute_advantages(totals);
  e.kept = e.max_total() > cfg.retention_threshold;
  e.mean_r_answer = mean_of(answers);
  e.proposer_reward = proposer_reward(rp, e.mean_r_answer, w);
  return e;
}

}  // namespace

EpochResult run_epoch(const KnowledgeGraph& g, const CurriculumState& cur,
                      const SelfPlayConfig& cfg, const RewardWeights& w,
                      GenerationModel& model, std::uint64_t epoch_seed) {
  cfg.validate();
  w.validate();
  EpochResult result;
  auto& eps = result.episodes;
  eps.resize(static_cast<std::size_t>(cfg.questions_per_epoch));

  if (cfg.max_in_flight <= 1) {
    for (int i = 0; i < cfg.questions_per_epoch; ++i)
      eps[i] = run_episode(g, cur, cfg, w, model, epoch_seed, i);
  } else {
    for (int start = 0; start < cfg.questions_per_epoch; start += cfg.max_in_flight) {
      const int end = std::min(cfg.questions_per_epoch, start + cfg.max_in_flight);
      std::vector<std::future<QAEpisode>> wave;
      for (int i = start; i < end; ++i)
        wave.push_back(std::async(std::launch::async, run_episode, std::cref(g),
                                  std::cref(cur), std::cref(cfg), std::cref(w),
                                  std::ref(model), epoch_seed, i));
      for (int i = start; i < end; ++i) eps[i] = wave[i - start].get();
    }
  }

  EpochStats& s = result.stats;
  s.epoch = cur.epoch;
  s.max_hops = cur.max_hops;
  s.difficulty = cur.difficulty;
  s.weights = w;
  s.attempted = cfg.questions_per_epoch;

  std::map<EdgeType, double> acc_sum;
  std::vector<double> ra, totals_mean, totals_sum, prop;
  for (const auto& e : eps) {
    if (e.status == EpisodeStatus::kSkipped) ++s.skipped;
    if (e.status == EpisodeStatus::kFailed) ++s.failed;
    if (e.status != EpisodeStatus::kOk) {
      s.findings.push_back("episode " + std::to_string(e.index) + " " +
                           std::string(to_string(e.status)) + ": " + e.finding);
      continue;
    }
    ++s.ok;
    if (e.kept) ++s.kept;
    std::set<EdgeType> types;
    for (const auto& edge : e.proposed.path.edges) types.insert(edge.type);
    for (EdgeType t : types) {
      acc_sum[t] += e.mean_r_answer;
      ++s.per_type_episodes[t];
    }
    ra.push_back(e.mean_r_answer);
    double sum = 0.0;
    for (const auto& r : e.rewards) sum += r.total;
    totals_sum.push_back(sum);
    totals_mean.push_back(sum / static_cast<double>(e.rewards.size()));
    prop.push_back(e.proposer_reward);
  }

  if (s.failed * 2 > s.attempted) {
    std::string msg = "epoch " + std::to_string(cur.epoch) + " aborted: " +
                      std::to_string(s.failed) + "/" + std::to_string(s.attempted) +
                      " episodes failed";
    for (std::size_t i = 0; i < s.findings.size() && i < 5; ++i)
      msg += "; " + s.findings[i];
    throw EndpointError(msg);
  }

  for (const auto& [t, sum] : acc_sum)
    s.per_type_accuracy[t] = sum / static_cast<double>(s.per_type_episodes[t]);
  s.mean_r_answer = mean_of(ra);
  s.mean_total_reward = mean_of(totals_mean);
  s.proposer_credit_mean = mean_of(totals_mean);
  s.proposer_credit_sum = mean_of(totals_sum);
  s.mean_proposer_reward = mean_of(prop);

  if (!prop.empty()) {
    const auto adv = compute_advantages(prop);
    std::size_t k = 0;
    for (auto& e : eps)
      if (e.status == EpisodeStatus::kOk) e.proposer_advantage = adv[k++];
  }

  MinibatchEvent pending;
  for (const auto& e : eps) {
    if (e.status != EpisodeStatus::kOk || !e.kept) continue;
    pending.episode_indices.push_back(e.index);
    if (static_cast<int>(pending.episode_indices.size()) == cfg.minibatch_every) {
      pending.ordinal = static_cast<int>(s.minibatches.size());
      s.minibatches.push_back(std::move(pending));
      pending = {};
    }
  }
  return result;
}

PreferenceRecord make_preference_record(const QAEpisode& e,
                                        const TrainerMetadata& meta) {
  PreferenceRecord r;
  r.epoch = e.epoch;
  r.episode = e.index;
  r.question = e.proposed.question;
  r.gold_answer = e.proposed.gold_answer;
  r.candidates = e.answers;
  r.rewards = e.rewards;
  r.advantages = e.advantages;
  r.path_nodes = e.proposed.path.nodes;
  r.declared_path = e.proposed.declared_path;
  r.trainer = meta;

  r.ranking.resize(e.rewards.size());
  std::iota(r.ranking.begin(), r.ranking.end(), 0);
  std::stable_sort(r.ranking.begin(), r.ranking.end(), [&](int a, int b) {
    return e.rewards[a].total > e.rewards[b].total;
  });
  for (std::size_t a = 0; a < r.ranking.size(); ++a)
    for (std::size_t b = a + 1; b < r.ranking.size(); ++b)
      if (e.rewards[r.ranking[a]].total > e.rewards[r.ranking[b]].total)
        r.pairs.emplace_back(r.ranking[a], r.ranking[b]);
  return r;
}

nlohmann::json to_json(const PreferenceRecord& r) {
  nlohmann::json rewards = nlohmann::json::array();
  for (const auto& b : r.rewards) rewards.push_back(to_json(b));
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [c, rj] : r.pairs) pairs.push_back({c, rj});
  const auto& t = r.trainer;
  return {{"epoch", r.epoch},
          {"episode", r.episode},
          {"question", r.question},
          {"gold_answer", r.gold_answer},
          {"candidates", r.candidates},
          {"rewards", rewards},
          {"advantages", r.advantages},
          {"ranking", r.ranking},
          {"pairs", pairs},
          {"path_nodes", r.path_nodes},
          {"declared_path", r.declared_path},
          {"trainer",
           {{"beta", t.beta},
            {"learning_rate", t.learning_rate},
            {"lora_rank", t.lora_rank},
            {"lora_alpha", t.lora_alpha},
            {"lora_dropout", t.lora_dropout},
            {"lora_targets", t.lora_targets},
            {"batch_size", t.batch_size},
            {"grad_accum", t.grad_accum},
            {"max_update_steps", t.max_update_steps},
            {"config_hash", t.config_hash}}}};
}

PreferenceRecord preference_from_json(const nlohmann::json& j) {
  PreferenceRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.episode = j.at("episode").get<int>();
  r.question = j.at("question").get<std::string>();
  r.gold_answer = j.at("gold_answer").get<std::string>();
  r.candidates = j.at("candidates").get<std::vector<std::string>>();
  for (const auto& b : j.at("rewards")) r.rewards.push_back(breakdown_from_json(b));
  r.advantages = j.at("advantages").get<std::vector<double>>();
  r.ranking = j.at("ranking").get<std::vector<int>>();
  for (const auto& p : j.at("pairs"))
    r.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  r.path_nodes = j.at("path_nodes").get<std::vector<std::string>>();
  r.declared_path = j.at("declared_path").get<std::vector<std::string>>();
  const auto& t = j.at("trainer");
  r.trainer.beta = t.at("beta").get<double>();
  r.trainer.learning_rate = t.at("learning_rate").get<double>();
  r.trainer.lora_rank = t.at("lora_rank").get<int>();
  r.trainer.lora_alpha = t.at("lora_alpha").get<int>();
  r.trainer.lora_dropout = t.at("lora_dropout").get<double>();
  r.trainer.lora_targets = t.at("lora_targets").get<std::vector<std::string>>();
  r.trainer.batch_size = t.at("batch_size").get<int>();
  r.trainer.grad_accum = t.at("grad_accum").get<int>();
  r.trainer.max_update_steps = t.at("max_update_steps").get<int>();
  r.trainer.config_hash = t.at("config_hash").get<std::string>();
  const std::size_t g = r.candidates.size();
  if (r.rewards.size() != g || r.advantages.size() != g || r.ranking.size() != g)
    throw SchemaError("/candidates", "group arrays differ in length");
  return r;
}

std::size_t export_preferences(std::span<const QAEpisode> episodes,
                               const std::filesystem::path& path,
                               const TrainerMetadata& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  std::size_t n = 0;
  for (const auto& e : episodes) {
    if (e.status != EpisodeStatus::kOk || !e.kept) continue;
    out << to_json(make_preference_record(e, meta)).dump() << "\n";
    ++n;
  }
  if (!out) throw Error("write failed: " + path.string());
  return n;
}

std::vector<PreferenceRecord> load_preferences(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("preference file not found: " + path.string());
  std::vector<PreferenceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      out.push_back(preference_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.filename().string() + ":" + std::to_string(lineno),
                        e.what());
    }
  }
  return out;
}

AuditResult audit_asymmetry(const QAEpisode& e, const KnowledgeGraph& g) {
  const std::string expected = render_solver_prompt(e.proposed.question);
  if (e.solver.prompt != expected)
    return {false, "solver prompt is not a function of the question alone"};
  if (e.solver.image_refs != e.proposed.image_refs)
    return {false, "solver images differ from the question's images"};

  const std::size_t qpos = expected.find(e.proposed.question);
  std::string scaffold = expected;
  if (!e.proposed.question.empty() && qpos != std::string::npos)
    scaffold.erase(qpos, e.proposed.question.size());
  const std::string low = text::to_lower(scaffold);

  auto leaks = [&](const std::string& needle) {
    const std::string n = text::to_lower(text::trim(needle));
    return !n.empty() && low.find(n) != std::string::npos;
  };
  if (leaks(e.proposed.gold_answer)) return {false, "gold answer leaked"};
  for (const auto& id : e.proposed.path.nodes) {
    if (leaks(id)) return {false, "node id leaked: " + id};
    if (const KGNode* n = g.find_node(id); n && leaks(n->content))
      return {false, "node content leaked: " + id};
  }
  return {};
}

}  // namespace graphplay
