#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphplay/kg_store.hpp"
#include "graphplay/path_sampler.hpp"

// Prompt rendering and the sentinel-line output contract shared by the
// Proposer and the Solver.
namespace graphplay {

// Edge-type specific question templates. Slots: {start}, {start_type},
// {end_type}, {hops}, {chain}, {cell}.
struct TemplateSet {
  std::map<EdgeType, std::string> by_edge_type = defaults();
  std::string multi_hop_prefix = "[{hops}-hop chain: {chain}] ";
  std::string table_suffix = " Report the value for {cell}.";
  std::map<DifficultyLevel, std::string> difficulty_prefix = {
      {DifficultyLevel::kVQA, "Using the provided image if any: "},
      {DifficultyLevel::kFactual, ""},
      {DifficultyLevel::kCausal, "Explain the reasoning: "},
      {DifficultyLevel::kInstructionFollowing, "In one sentence: "}};

  static std::map<EdgeType, std::string> defaults();
  static TemplateSet from_json(const nlohmann::json& j);
};

// Highest default-weight edge type on the path; ties go to the earliest edge.
EdgeType dominant_edge_type(const ReasoningPath& path);

std::string render_template(const TemplateSet& templates,
                            const ReasoningPath& path, const KnowledgeGraph& g,
                            DifficultyLevel difficulty,
                            const std::string& table_cell);

std::string render_proposer_prompt(const ReasoningPath& path,
                                   const KnowledgeGraph& g,
                                   std::string_view template_text,
                                   DifficultyLevel difficulty,
                                   std::string_view gold);

// Built solely from the question text.
std::string render_solver_prompt(std::string_view question);

std::string repair_instruction();

struct ParsedProposal {
  std::string question;
  std::string answer;
  std::vector<std::string> path;
};

// Tolerant QUESTION:/ANSWER:/PATH: parser (case-insensitive keys, markdown
// emphasis, multi-line values). PATH accepts "a -> b", "a, b" or
// "[node:a] [node:b]". Needs a question and at least one path id.
std::optional<ParsedProposal> parse_proposer_response(std::string_view text);

// Text after ANSWER: if present, else the whole trimmed reply.
std::string parse_solver_response(std::string_view text);

// Read-back helpers for test doubles.
struct ProposerPromptView {
  std::string template_text;
  std::vector<std::string> path_ids;
  std::string gold;
};
std::optional<ProposerPromptView> read_proposer_prompt(std::string_view prompt);
std::optional<std::string> read_solver_question(std::string_view prompt);

}  // namespace graphplay
