#include "graphplay/generation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"
#include "graphplay/prompts.hpp"
#include "http_client.hpp"

namespace graphplay {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kProposer: return "proposer";
    case Role::kSolver: return "solver";
    case Role::kClassifier: return "classifier";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view s) {
  for (Role r : {Role::kProposer, Role::kSolver, Role::kClassifier})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

nlohmann::json GenerationRequest::to_json() const {
  return {{"role", std::string(to_string(role))},
          {"prompt", prompt},
          {"images", image_refs},
          {"n", n},
          {"max_tokens", max_tokens},
          {"temperature", temperature},
          {"seed", seed}};
}

GenerationRequest GenerationRequest::from_json(const nlohmann::json& j) {
  GenerationRequest r;
  auto role = parse_role(j.at("role").get<std::string>());
  if (!role) throw SchemaError("/role", "unknown role");
  r.role = *role;
  r.prompt = j.at("prompt").get<std::string>();
  r.image_refs = j.value("images", std::vector<std::string>{});
  r.n = j.value("n", 1);
  r.max_tokens = j.value("max_tokens", 256);
  r.temperature = j.value("temperature", 0.7);
  r.seed = j.value("seed", std::uint64_t{0});
  if (r.n < 1) throw SchemaError("/n", "must be >= 1");
  return r;
}

struct HttpGenerationModel::Limiter {
  explicit Limiter(int n) : limiter(n) {}
  detail::InFlightLimiter limiter;
};

HttpGenerationModel::HttpGenerationModel(std::string endpoint_url,
                                         int max_in_flight, int timeout_seconds)
    : url_(std::move(endpoint_url)),
      timeout_seconds_(timeout_seconds),
      limiter_(std::make_unique<Limiter>(max_in_flight)) {
  if (url_.empty()) throw ConfigError("generation endpoint url is empty");
}

HttpGenerationModel::~HttpGenerationModel() = default;

std::vector<std::string> HttpGenerationModel::generate(
    const GenerationRequest& request) {
  nlohmann::json resp;
  {
    detail::InFlightGuard guard(limiter_->limiter);
    resp = detail::post_json(url_, "/v1/generate", request.to_json(),
                             timeout_seconds_);
  }
  if (!resp.is_object() || !resp.contains("candidates") ||
      !resp["candidates"].is_array())
    throw ProtocolError("/v1/generate: missing 'candidates' array");
  const auto& c = resp["candidates"];
  if (c.size() != static_cast<std::size_t>(request.n))
    throw ProtocolError("/v1/generate: expected " + std::to_string(request.n) +
                        " candidates, got " + std::to_string(c.size()));
  std::vector<std::string> out;
  out.reserve(c.size());
  for (const auto& s : c) {
    if (!s.is_string()) throw ProtocolError("/v1/generate: non-string candidate");
    out.push_back(s.get<std::string>());
  }
  return out;
}

ScriptedModel::ScriptedModel() {
  behaviors_[Role::kProposer] = {"faithful", {}};
  behaviors_[Role::kSolver] = {"echo_gold", {}};
  behaviors_[Role::kClassifier] = {"fixed", {"None"}};
}

std::unique_ptr<ScriptedModel> ScriptedModel::from_json(const nlohmann::json& s) {
  auto m = std::make_unique<ScriptedModel>();
  for (Role role : {Role::kProposer, Role::kSolver, Role::kClassifier}) {
    const std::string key(to_string(role));
    if (!s.contains(key)) continue;
    const auto& b = s.at(key);
    Behavior beh;
    beh.name = b.value("behavior", std::string("fixed"));
    beh.responses = b.value("responses", std::vector<std::string>{});
    m->set_behavior(role, std::move(beh));
  }
  if (s.contains("rules")) {
    std::size_t i = 0;
    for (const auto& r : s.at("rules")) {
      Rule rule;
      auto role = parse_role(r.at("role").get<std::string>());
      if (!role)
        throw SchemaError("/rules/" + std::to_string(i) + "/role", "unknown role");
      rule.role = *role;
      if (r.contains("ordinal")) rule.ordinal = r.at("ordinal").get<int>();
      if (r.contains("prompt_hash"))
        rule.prompt_hash = r.at("prompt_hash").get<std::string>();
      if (r.contains("contains")) rule.contains = r.at("contains").get<std::string>();
      rule.responses = r.at("responses").get<std::vector<std::string>>();
      if (rule.responses.empty())
        throw SchemaError("/rules/" + std::to_string(i) + "/responses", "empty");
      m->add_rule(std::move(rule));
      ++i;
    }
  }
  if (s.contains("answers"))
    for (const auto& [q, a] : s.at("answers").items())
      m->register_answer(q, a.get<std::string>());
  return m;
}

std::unique_ptr<ScriptedModel> ScriptedModel::from_file(
    const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw NotFoundError("scenario file not found: " + p.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
  return from_json(j);
}

void ScriptedModel::add_rule(Rule rule) {
  std::lock_guard lock(mu_);
  rules_.push_back(std::move(rule));
}

void ScriptedModel::set_behavior(Role role, Behavior behavior) {
  static const std::map<Role, std::vector<std::string>> known = {
      {Role::kProposer, {"faithful", "unparseable", "repairable", "fixed"}},
      {Role::kSolver, {"echo_gold", "wrong", "empty", "mixed", "fixed"}},
      {Role::kClassifier, {"fixed"}}};
  const auto& names = known.at(role);
  if (std::find(names.begin(), names.end(), behavior.name) == names.end())
    throw ConfigError("unknown " + std::string(to_string(role)) + " behavior '" +
                      behavior.name + "'");
  if (behavior.name == "fixed" && behavior.responses.empty())
    throw ConfigError("fixed behavior needs responses");
  std::lock_guard lock(mu_);
  behaviors_[role] = std::move(behavior);
}

void ScriptedModel::register_answer(std::string question, std::string answer) {
  std::lock_guard lock(mu_);
  answers_[std::move(question)] = std::move(answer);
}

std::string ScriptedModel::prompt_hash(std::string_view prompt) {
  return to_hex(fnv1a64(prompt));
}

std::vector<GenerationRequest> ScriptedModel::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

int ScriptedModel::calls(Role role) const {
  std::lock_guard lock(mu_);
  auto it = counters_.find(role);
  return it == counters_.end() ? 0 : it->second;
}

std::vector<std::string> ScriptedModel::generate(const GenerationRequest& request) {
  if (request.n < 1) throw InvariantError("generate: n must be >= 1");
  std::lock_guard lock(mu_);
  const int ordinal = counters_[request.role]++;
  log_.push_back(request);
  return respond(request, ordinal);
}

// Called with mu_ held.
std::vector<std::string> ScriptedModel::respond(const GenerationRequest& req,
                                                int ordinal) {
  const auto n = static_cast<std::size_t>(req.n);
  auto cycle = [&](const std::vector<std::string>& rs, std::size_t offset) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(rs[(offset + i) % rs.size()]);
    return out;
  };

  std::string hash;
  for (const auto& rule : rules_) {
    if (rule.role != req.role) continue;
    if (rule.ordinal && *rule.ordinal != ordinal) continue;
    if (rule.prompt_hash) {
      if (hash.empty()) hash = prompt_hash(req.prompt);
      if (*rule.prompt_hash != hash) continue;
    }
    if (rule.contains && req.prompt.find(*rule.contains) == std::string::npos)
      continue;
    return cycle(rule.responses, 0);
  }

  const Behavior& b = behaviors_.at(req.role);
  if (b.name == "fixed") return cycle(b.responses, static_cast<std::size_t>(ordinal));

  if (req.role == Role::kProposer) {
    const bool repair_attempt =
        req.prompt.find("could not be parsed") != std::string::npos;
    if (b.name == "unparseable" || (b.name == "repairable" && !repair_attempt))
      return std::vector<std::string>(n, "I would rather describe the figure in prose.");
    auto view = read_proposer_prompt(req.prompt);
    if (!view) return std::vector<std::string>(n, "no path given");
    std::ostringstream q;
    q << "Q" << ordinal << ". " << view->template_text;
    std::string question = q.str();
    answers_[question] = view->gold;
    std::ostringstream r;
    r << "QUESTION: " << question << "\nANSWER: " << view->gold << "\nPATH: ";
    for (std::size_t i = 0; i < view->path_ids.size(); ++i)
      r << (i ? " -> " : "") << view->path_ids[i];
    r << "\n";
    return std::vector<std::string>(n, r.str());
  }

  if (req.role == Role::kSolver) {
    std::string gold = "unknown";
    if (auto q = read_solver_question(req.prompt)) {
      auto it = answers_.find(*q);
      if (it != answers_.end()) gold = it->second;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (b.name == "echo_gold" || (b.name == "mixed" && i % 2 == 0))
        out.push_back("ANSWER: " + gold);
      else if (b.name == "empty")
        out.push_back("ANSWER:");
      else
        out.push_back("ANSWER: xyzzy");
    }
    return out;
  }
  return std::vector<std::string>(n, "None");
}

}  // namespace graphplay
