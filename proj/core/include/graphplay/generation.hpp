#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace graphplay {

enum class Role { kProposer, kSolver, kClassifier };
std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct GenerationRequest {
  Role role = Role::kSolver;
  std::string prompt;
  std::vector<std::string> image_refs;
  int n = 1;
  int max_tokens = 256;
  double temperature = 0.7;
  std::uint64_t seed = 0;

  // {"role","prompt","images","n","max_tokens","temperature","seed"}
  nlohmann::json to_json() const;
  static GenerationRequest from_json(const nlohmann::json& j);
};

class GenerationModel {
 public:
  virtual ~GenerationModel() = default;
  // Returns exactly request.n candidates.
  virtual std::vector<std::string> generate(const GenerationRequest& request) = 0;
};

// POST {endpoint}/v1/generate; expects {"candidates":[string]} with n
// entries. Concurrent calls are bounded by `max_in_flight`.
class HttpGenerationModel final : public GenerationModel {
 public:
  HttpGenerationModel(std::string endpoint_url, int max_in_flight = 4,
                      int timeout_seconds = 120);
  ~HttpGenerationModel() override;
  std::vector<std::string> generate(const GenerationRequest& request) override;

 private:
  struct Limiter;
  std::string url_;
  int timeout_seconds_;
  std::unique_ptr<Limiter> limiter_;
};

// Offline test double driven by a scenario file. Explicit rules match on
// (role, ordinal | prompt hash | substring); otherwise the role's default
// behavior answers:
//   Proposer: faithful  - question from the prompt template, the prompt's
//                         path ids as PATH, the prompt's gold as ANSWER
//             unparseable - free text without sentinels
//             repairable  - unparseable until the prompt carries the
//                           repair instruction, then faithful
//             fixed       - cycles `responses`
//   Solver:   echo_gold - answers with the gold registered for the question
//             wrong     - "xyzzy"
//             empty     - empty answer
//             mixed     - even candidates echo gold, odd ones are wrong
//             fixed     - cycles `responses`
// Faithful proposals register (question -> gold) so echo_gold can answer.
// Ordinals count calls per role starting at 0.
class ScriptedModel final : public GenerationModel {
 public:
  struct Rule {
    Role role = Role::kSolver;
    std::optional<int> ordinal;
    std::optional<std::string> prompt_hash;
    std::optional<std::string> contains;
    std::vector<std::string> responses;
  };
  struct Behavior {
    std::string name;
    std::vector<std::string> responses;
  };

  ScriptedModel();
  static std::unique_ptr<ScriptedModel> from_json(const nlohmann::json& scenario);
  static std::unique_ptr<ScriptedModel> from_file(const std::filesystem::path& p);

  void add_rule(Rule rule);
  void set_behavior(Role role, Behavior behavior);
  // Installs a known answer for a question (used by echo_gold).
  void register_answer(std::string question, std::string answer);

  std::vector<std::string> generate(const GenerationRequest& request) override;

  std::vector<GenerationRequest> requests() const;
  int calls(Role role) const;

  // Hex FNV-1a of a prompt, the key used by prompt_hash rules.
  static std::string prompt_hash(std::string_view prompt);

 private:
  std::vector<std::string> respond(const GenerationRequest& req, int ordinal);

  mutable std::mutex mu_;
  std::vector<Rule> rules_;
  std::map<Role, Behavior> behaviors_;
  std::map<std::string, std::string> answers_;
  std::map<Role, int> counters_;
  std::vector<GenerationRequest> log_;
};

}  // namespace graphplay
