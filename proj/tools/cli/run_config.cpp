#include "run_config.hpp"

#include <fstream>
#include <set>

#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"

#ifndef GRAPHPLAY_VERSION
#define GRAPHPLAY_VERSION "0.0.0"
#endif

namespace graphplay::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, std::string_view where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "/" + key + ": wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

RewardWeights weights_from(const json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(std::string(where) + ": expected [w_a, w_p, w_c]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string code_version() { return GRAPHPLAY_VERSION; }

void RunConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (embed_dim < 1) throw ConfigError("stubs/embed_dim must be >= 1");
  if (max_in_flight < 1) throw ConfigError("endpoints/max_in_flight must be >= 1");
  if (timeout_seconds < 1) throw ConfigError("endpoints/timeout_seconds must be >= 1");
  construct.validate();
  selfplay.validate();
  schedule.validate();
  try {
    anneal.initial.validate();
    anneal.final_weights.validate();
  } catch (const InvariantError& e) {
    throw ConfigError(std::string("reward: ") + e.what());
  }
  if (anneal.total_epochs < 1) throw ConfigError("reward/total_epochs must be >= 1");
  refine.validate();
  if (!(trainer.beta > 0.0)) throw ConfigError("trainer/beta must be > 0");
}

json RunConfig::to_json() const {
  json corpus_json = json::array();
  for (const auto& p : corpus) corpus_json.push_back(p.generic_string());
  json weights = json::object();
  for (EdgeType t : kAllEdgeTypes) weights[std::string(to_string(t))] = selfplay.edge_weights[t];
  json hops = json::object();
  for (const auto& [e, h] : schedule.hops_from_epoch) hops[std::to_string(e)] = h;
  json diff = json::object();
  for (const auto& [e, d] : schedule.difficulty_from_epoch)
    diff[std::to_string(e)] = std::string(to_string(d));
  const auto& a = anneal;
  return {
      {"corpus", corpus_json},
      {"output_dir", output_dir.generic_string()},
      {"endpoints",
       {{"generate", generate_url},
        {"embed", embed_url},
        {"classify", classify_url},
        {"max_in_flight", max_in_flight},
        {"timeout_seconds", timeout_seconds}}},
      {"stubs",
       {{"scenario", scenario.generic_string()},
        {"classifier", classifier_script.generic_string()},
        {"embed_dim", embed_dim}}},
      {"seed", seed},
      {"epochs", epochs},
      {"questions_per_epoch", selfplay.questions_per_epoch},
      {"group_size", selfplay.group_size},
      {"max_tokens", selfplay.generation.max_tokens},
      {"temperature", selfplay.generation.temperature},
      {"batch_solver", selfplay.batch_solver},
      {"construct",
       {{"tau_semantic", construct.tau_semantic},
        {"max_edges_per_node", construct.max_edges_per_node},
        {"tau_cross", construct.tau_cross},
        {"concept_min_freq", construct.concept_min_freq},
        {"reference_patterns", construct.reference_patterns}}},
      {"sampler", {{"edge_weights", weights}, {"hops", hops}, {"difficulty", diff}}},
      {"reward",
       {{"initial", {a.initial.w_a, a.initial.w_p, a.initial.w_c}},
        {"final", {a.final_weights.w_a, a.final_weights.w_p, a.final_weights.w_c}},
        {"total_epochs", a.total_epochs},
        {"epsilon", selfplay.epsilon},
        {"tau_num", selfplay.tau_num},
        {"retention_threshold", selfplay.retention_threshold},
        {"minibatch_every", selfplay.minibatch_every}}},
      {"refine",
       {{"enabled", refine_enabled},
        {"merge", merge_nodes},
        {"quarantine_new_edges", quarantine_new_edges},
        {"high_reward_threshold", refine.high_reward_threshold},
        {"confidence_penalty", refine.confidence_penalty},
        {"new_edge_confidence", refine.new_edge_confidence},
        {"tau_prune", refine.tau_prune},
        {"tau_merge", refine.tau_merge}}},
      {"trainer",
       {{"beta", trainer.beta},
        {"learning_rate", trainer.learning_rate},
        {"lora_rank", trainer.lora_rank},
        {"lora_alpha", trainer.lora_alpha},
        {"lora_dropout", trainer.lora_dropout},
        {"lora_targets", trainer.lora_targets},
        {"batch_size", trainer.batch_size},
        {"grad_accum", trainer.grad_accum},
        {"max_update_steps", trainer.max_update_steps}}},
  };
}

std::string RunConfig::fingerprint() const {
  return to_hex(fnv1a64(to_json().dump() + "\n" + code_version()));
}

RunConfig config_from_json(const json& j, const fs::path& base) {
  check_keys(j, "config",
             {"corpus", "output_dir", "endpoints", "stubs", "seed", "epochs",
              "questions_per_epoch", "group_size", "max_tokens", "temperature",
              "batch_solver", "construct", "sampler", "reward", "refine", "trainer"});
  RunConfig c;
  if (j.contains("corpus")) {
    for (const auto& p : j.at("corpus")) c.corpus.push_back(resolve(base, p.get<std::string>()));
  }
  if (j.contains("output_dir"))
    c.output_dir = resolve(base, j.at("output_dir").get<std::string>());

  if (j.contains("endpoints")) {
    const auto& e = j.at("endpoints");
    check_keys(e, "endpoints",
               {"generate", "embed", "classify", "max_in_flight", "timeout_seconds"});
    read(e, "generate", c.generate_url, "endpoints");
    read(e, "embed", c.embed_url, "endpoints");
    read(e, "classify", c.classify_url, "endpoints");
    read(e, "max_in_flight", c.max_in_flight, "endpoints");
    read(e, "timeout_seconds", c.timeout_seconds, "endpoints");
  }
  if (j.contains("stubs")) {
    const auto& s = j.at("stubs");
    check_keys(s, "stubs", {"scenario", "classifier", "embed_dim"});
    std::string scenario, classifier;
    read(s, "scenario", scenario, "stubs");
    read(s, "classifier", classifier, "stubs");
    c.scenario = resolve(base, scenario);
    c.classifier_script = resolve(base, classifier);
    read(s, "embed_dim", c.embed_dim, "stubs");
  }
  read(j, "seed", c.seed, "config");
  read(j, "epochs", c.epochs, "config");
  read(j, "questions_per_epoch", c.selfplay.questions_per_epoch, "config");
  read(j, "group_size", c.selfplay.group_size, "config");
  read(j, "max_tokens", c.selfplay.generation.max_tokens, "config");
  read(j, "temperature", c.selfplay.generation.temperature, "config");
  read(j, "batch_solver", c.selfplay.batch_solver, "config");

  if (j.contains("construct")) {
    const auto& k = j.at("construct");
    check_keys(k, "construct",
               {"tau_semantic", "max_edges_per_node", "tau_cross", "concept_min_freq",
                "reference_patterns"});
    read(k, "tau_semantic", c.construct.tau_semantic, "construct");
    read(k, "max_edges_per_node", c.construct.max_edges_per_node, "construct");
    read(k, "tau_cross", c.construct.tau_cross, "construct");
    read(k, "concept_min_freq", c.construct.concept_min_freq, "construct");
    read(k, "reference_patterns", c.construct.reference_patterns, "construct");
  }
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    check_keys(s, "sampler", {"edge_weights", "hops", "difficulty"});
    if (s.contains("edge_weights")) {
      for (const auto& [name, w] : s.at("edge_weights").items()) {
        auto t = parse_edge_type(name);
        if (!t) throw ConfigError("sampler/edge_weights: unknown edge type '" + name + "'");
        c.selfplay.edge_weights.set(*t, w.get<double>());
      }
    }
    if (s.contains("hops")) {
      c.schedule.hops_from_epoch.clear();
      for (const auto& [e, h] : s.at("hops").items())
        c.schedule.hops_from_epoch[std::stoi(e)] = h.get<int>();
    }
    if (s.contains("difficulty")) {
      c.schedule.difficulty_from_epoch.clear();
      for (const auto& [e, d] : s.at("difficulty").items()) {
        auto level = parse_difficulty(d.get<std::string>());
        if (!level) throw ConfigError("sampler/difficulty: unknown level " + d.dump());
        c.schedule.difficulty_from_epoch[std::stoi(e)] = *level;
      }
    }
  }
  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    check_keys(r, "reward",
               {"initial", "final", "total_epochs", "epsilon", "tau_num",
                "retention_threshold", "minibatch_every"});
    if (r.contains("initial")) c.anneal.initial = weights_from(r.at("initial"), "reward/initial");
    if (r.contains("final"))
      c.anneal.final_weights = weights_from(r.at("final"), "reward/final");
    read(r, "total_epochs", c.anneal.total_epochs, "reward");
    read(r, "epsilon", c.selfplay.epsilon, "reward");
    read(r, "tau_num", c.selfplay.tau_num, "reward");
    read(r, "retention_threshold", c.selfplay.retention_threshold, "reward");
    read(r, "minibatch_every", c.selfplay.minibatch_every, "reward");
  }
  if (j.contains("refine")) {
    const auto& r = j.at("refine");
    check_keys(r, "refine",
               {"enabled", "merge", "quarantine_new_edges", "high_reward_threshold",
                "confidence_penalty", "new_edge_confidence", "tau_prune", "tau_merge"});
    read(r, "enabled", c.refine_enabled, "refine");
    read(r, "merge", c.merge_nodes, "refine");
    read(r, "quarantine_new_edges", c.quarantine_new_edges, "refine");
    read(r, "high_reward_threshold", c.refine.high_reward_threshold, "refine");
    read(r, "confidence_penalty", c.refine.confidence_penalty, "refine");
    read(r, "new_edge_confidence", c.refine.new_edge_confidence, "refine");
    read(r, "tau_prune", c.refine.tau_prune, "refine");
    read(r, "tau_merge", c.refine.tau_merge, "refine");
  }
  if (j.contains("trainer")) {
    const auto& t = j.at("trainer");
    check_keys(t, "trainer",
               {"beta", "learning_rate", "lora_rank", "lora_alpha", "lora_dropout",
                "lora_targets", "batch_size", "grad_accum", "max_update_steps"});
    read(t, "beta", c.trainer.beta, "trainer");
    read(t, "learning_rate", c.trainer.learning_rate, "trainer");
    read(t, "lora_rank", c.trainer.lora_rank, "trainer");
    read(t, "lora_alpha", c.trainer.lora_alpha, "trainer");
    read(t, "lora_dropout", c.trainer.lora_dropout, "trainer");
    read(t, "lora_targets", c.trainer.lora_targets, "trainer");
    read(t, "batch_size", c.trainer.batch_size, "trainer");
    read(t, "grad_accum", c.trainer.grad_accum, "trainer");
    read(t, "max_update_steps", c.trainer.max_update_steps, "trainer");
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void write_fingerprint(const RunConfig& cfg, const fs::path& dir,
                       const std::string& command) {
  fs::create_directories(dir);
  std::ofstream out(dir / "fingerprint.json", std::ios::binary | std::ios::trunc);
  out << json{{"command", command},
              {"code_version", code_version()},
              {"fingerprint", cfg.fingerprint()},
              {"config", cfg.to_json()}}
             .dump(2)
      << "\n";
}

std::unique_ptr<GenerationModel> make_generation_model(const RunConfig& cfg) {
  if (!cfg.generate_url.empty())
    return std::make_unique<HttpGenerationModel>(cfg.generate_url, cfg.max_in_flight,
                                                 cfg.timeout_seconds);
  if (!cfg.scenario.empty()) return ScriptedModel::from_file(cfg.scenario);
  return std::make_unique<ScriptedModel>();
}

std::unique_ptr<Embedder> make_run_embedder(const RunConfig& cfg) {
  EmbedProviderConfig e;
  e.dim = cfg.embed_dim;
  e.max_in_flight = cfg.max_in_flight;
  e.timeout_seconds = cfg.timeout_seconds;
  if (cfg.embed_url.empty()) {
    e.mode = EmbedProviderConfig::Mode::kDeterministicTest;
  } else {
    e.mode = EmbedProviderConfig::Mode::kHttpEndpoint;
    e.endpoint_url = cfg.embed_url;
  }
  return make_embedder(e);
}

std::unique_ptr<RelationClassifier> make_classifier(const RunConfig& cfg) {
  if (!cfg.classify_url.empty())
    return std::make_unique<HttpClassifier>(cfg.classify_url, 3, cfg.timeout_seconds);
  if (!cfg.classifier_script.empty()) {
    std::ifstream in(cfg.classifier_script);
    if (!in) throw NotFoundError("classifier script not found: " +
                                 cfg.classifier_script.string());
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw ConfigError(cfg.classifier_script.string() + ": " + e.what());
    }
    return ScriptedClassifier::from_json(j);
  }
  return std::make_unique<CueWordClassifier>();
}

}  // namespace graphplay::cli
