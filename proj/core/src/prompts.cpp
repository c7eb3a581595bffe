#include "graphplay/prompts.hpp"

#include <sstream>

#include "graphplay/error.hpp"
#include "graphplay/text.hpp"

namespace graphplay {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string one_line(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c == '\n' || c == '\r') c = ' ';
  return text::trim(out);
}

// First `max_words` words of a node's content.
std::string snippet(std::string_view content, std::size_t max_words = 12) {
  std::istringstream in{std::string(one_line(content))};
  std::string word, out;
  std::size_t n = 0;
  while (in >> word) {
    if (n++ == max_words) {
      out += " ...";
      break;
    }
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::string type_phrase(NodeType t) {
  switch (t) {
    case NodeType::kTextBlock: return "passage";
    case NodeType::kFigure: return "figure";
    case NodeType::kTable: return "table";
    case NodeType::kEquation: return "equation";
    case NodeType::kConcept: return "concept";
    case NodeType::kClaim: return "claim";
  }
  return "element";
}

std::string strip_markup(std::string_view line) {
  std::string s = text::trim(line);
  while (!s.empty() && (s.front() == '*' || s.front() == '#' || s.front() == '-' ||
                        s.front() == '>' || s.front() == '_'))
    s.erase(s.begin());
  return text::trim(s);
}

// Matches "KEY:" (case-insensitive, markdown tolerated) at line start and
// returns the remainder.
std::optional<std::string> keyed_value(std::string_view line, std::string_view key) {
  std::string s = strip_markup(line);
  if (s.size() < key.size()) return std::nullopt;
  if (text::to_lower(s.substr(0, key.size())) != text::to_lower(key))
    return std::nullopt;
  std::string rest = s.substr(key.size());
  std::size_t i = 0;
  while (i < rest.size() && (rest[i] == '*' || rest[i] == '_')) ++i;
  if (i >= rest.size() || rest[i] != ':') return std::nullopt;
  rest = rest.substr(i + 1);
  while (!rest.empty() && (rest.front() == '*' || rest.front() == '_'))
    rest.erase(rest.begin());
  return text::trim(rest);
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);
  return lines;
}

std::vector<std::string> parse_path_ids(std::string_view raw) {
  std::vector<std::string> ids;
  std::string s(raw);
  if (s.find("[node:") != std::string::npos) {
    std::size_t pos = 0;
    while ((pos = s.find("[node:", pos)) != std::string::npos) {
      std::size_t end = s.find(']', pos);
      if (end == std::string::npos) break;
      std::string id = text::trim(std::string_view(s).substr(pos + 6, end - pos - 6));
      if (!id.empty()) ids.push_back(id);
      pos = end + 1;
    }
    return ids;
  }
  replace_all(s, "->", " ");
  replace_all(s, "→", " ");
  for (char& c : s)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream in(s);
  std::string id;
  while (in >> id) ids.push_back(id);
  return ids;
}

}  // namespace

std::map<EdgeType, std::string> TemplateSet::defaults() {
  return {
      {EdgeType::kContains,
       "Within the part introduced by '{start}', what does the {end_type} state?"},
      {EdgeType::kHasCaption, "What does the caption of the {start_type} '{start}' say?"},
      {EdgeType::kReferences, "What does the {end_type} referenced by '{start}' show?"},
      {EdgeType::kIllustrates, "What does the {end_type} illustrate about '{start}'?"},
      {EdgeType::kQuantifies, "What quantity does the {end_type} report for '{start}'?"},
      {EdgeType::kDefines, "Which {end_type} is defined in connection with '{start}'?"},
      {EdgeType::kSupports, "What evidence in the {end_type} supports '{start}'?"},
      {EdgeType::kContradicts, "Which {end_type} contradicts '{start}'?"},
      {EdgeType::kDerivesFrom, "From which {end_type} does '{start}' derive?"},
      {EdgeType::kCompares, "How does '{start}' compare with the related {end_type}?"},
      {EdgeType::kSameConcept,
       "How is the idea in '{start}' reflected in the {end_type} of another document?"},
  };
}

TemplateSet TemplateSet::from_json(const nlohmann::json& j) {
  TemplateSet t;
  if (j.contains("by_edge_type")) {
    for (const auto& [name, value] : j.at("by_edge_type").items()) {
      auto type = parse_edge_type(name);
      if (!type) throw ConfigError("templates: unknown edge type '" + name + "'");
      t.by_edge_type[*type] = value.get<std::string>();
    }
  }
  if (j.contains("multi_hop_prefix"))
    t.multi_hop_prefix = j.at("multi_hop_prefix").get<std::string>();
  if (j.contains("table_suffix"))
    t.table_suffix = j.at("table_suffix").get<std::string>();
  if (j.contains("difficulty_prefix")) {
    for (const auto& [name, value] : j.at("difficulty_prefix").items()) {
      auto d = parse_difficulty(name);
      if (!d) throw ConfigError("templates: unknown difficulty '" + name + "'");
      t.difficulty_prefix[*d] = value.get<std::string>();
    }
  }
  return t;
}

EdgeType dominant_edge_type(const ReasoningPath& path) {
  const auto w = EdgeTypeWeights::defaults();
  EdgeType best = path.edges.front().type;
  for (const auto& e : path.edges)
    if (w[e.type] > w[best]) best = e.type;
  return best;
}

std::string render_template(const TemplateSet& templates,
                            const ReasoningPath& path, const KnowledgeGraph& g,
                            DifficultyLevel difficulty,
                            const std::string& table_cell) {
  const KGNode& start = g.node(path.nodes.front());
  const KGNode& end = g.node(path.terminal());
  const EdgeType dom = dominant_edge_type(path);

  std::string chain;
  for (std::size_t i = 0; i < path.edges.size(); ++i) {
    if (i) chain += " -> ";
    chain += to_string(path.edges[i].type);
  }

  std::string out;
  if (auto it = templates.difficulty_prefix.find(difficulty);
      it != templates.difficulty_prefix.end())
    out += it->second;
  if (path.hops() > 1) out += templates.multi_hop_prefix;
  auto it = templates.by_edge_type.find(dom);
  out += it != templates.by_edge_type.end() ? it->second
                                            : "What does '{start}' lead to?";
  if (end.type == NodeType::kTable && !table_cell.empty())
    out += templates.table_suffix;

  replace_all(out, "{start}", snippet(start.content));
  replace_all(out, "{start_type}", type_phrase(start.type));
  replace_all(out, "{end_type}", type_phrase(end.type));
  replace_all(out, "{hops}", std::to_string(path.hops()));
  replace_all(out, "{chain}", chain);
  replace_all(out, "{cell}", table_cell);
  return out;
}

std::string render_proposer_prompt(const ReasoningPath& path,
                                   const KnowledgeGraph& g,
                                   std::string_view template_text,
                                   DifficultyLevel difficulty,
                                   std::string_view gold) {
  std::ostringstream p;
  p << "You are the Proposer. Write one question whose answer is the GOLD "
       "answer and whose solution follows the reasoning path below.\n";
  p << "DIFFICULTY: " << to_string(difficulty) << "\n";
  p << "TEMPLATE: " << one_line(template_text) << "\n";
  p << "PATH:\n";
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const KGNode& n = g.node(path.nodes[i]);
    p << "[node:" << n.node_id << "] (" << to_string(n.type) << ") "
      << one_line(n.content) << "\n";
    if (i < path.edges.size())
      p << "  --" << to_string(path.edges[i].type)
        << (path.forward[i] ? "-->" : " (reverse)-->") << "\n";
  }
  p << "PATH_IDS: ";
  for (std::size_t i = 0; i < path.nodes.size(); ++i)
    p << (i ? " -> " : "") << path.nodes[i];
  p << "\n";
  p << "GOLD: " << one_line(gold) << "\n";
  p << "Reply exactly in the form:\nQUESTION: <question>\nANSWER: <answer>\n"
       "PATH: <node ids of your reasoning path separated by ->>\n";
  return p.str();
}

std::string render_solver_prompt(std::string_view question) {
  std::string p =
      "You are the Solver. Answer the question. Reply with one line starting "
      "with ANSWER:.\nQUESTION: ";
  p += question;
  p += "\n";
  return p;
}

std::string repair_instruction() {
  return "\nYour previous reply could not be parsed. Reply again using exactly "
         "the QUESTION:, ANSWER: and PATH: lines.\n";
}

std::optional<ParsedProposal> parse_proposer_response(std::string_view reply) {
  ParsedProposal out;
  std::string* current = nullptr;
  std::string path_raw;
  bool saw_path = false;
  for (const auto& line : split_lines(reply)) {
    if (auto v = keyed_value(line, "QUESTION")) {
      out.question = *v;
      current = &out.question;
    } else if (auto v2 = keyed_value(line, "ANSWER")) {
      out.answer = *v2;
      current = &out.answer;
    } else if (auto v3 = keyed_value(line, "PATH")) {
      path_raw = *v3;
      saw_path = true;
      current = &path_raw;
    } else if (current && !text::trim(line).empty()) {
      *current += (current->empty() ? "" : " ") + text::trim(line);
    }
  }
  out.question = text::trim(out.question);
  out.answer = text::trim(out.answer);
  if (out.question.empty() || !saw_path) return std::nullopt;
  out.path = parse_path_ids(path_raw);
  if (out.path.empty()) return std::nullopt;
  return out;
}

std::string parse_solver_response(std::string_view reply) {
  std::string answer;
  bool found = false;
  for (const auto& line : split_lines(reply)) {
    if (auto v = keyed_value(line, "ANSWER")) {
      answer = *v;
      found = true;
    } else if (found && !text::trim(line).empty()) {
      answer += " " + text::trim(line);
    }
  }
  return found ? text::trim(answer) : text::trim(reply);
}

std::optional<ProposerPromptView> read_proposer_prompt(std::string_view prompt) {
  ProposerPromptView view;
  bool has_ids = false, has_gold = false;
  for (const auto& line : split_lines(prompt)) {
    if (line.rfind("TEMPLATE: ", 0) == 0) {
      view.template_text = line.substr(10);
    } else if (line.rfind("PATH_IDS: ", 0) == 0) {
      view.path_ids = parse_path_ids(line.substr(10));
      has_ids = true;
    } else if (line.rfind("GOLD: ", 0) == 0) {
      view.gold = line.substr(6);
      has_gold = true;
    }
  }
  if (!has_ids || !has_gold) return std::nullopt;
  return view;
}

std::optional<std::string> read_solver_question(std::string_view prompt) {
  auto pos = prompt.find("\nQUESTION: ");
  if (pos == std::string_view::npos) return std::nullopt;
  return text::trim(prompt.substr(pos + 11));
}

}  // namespace graphplay
