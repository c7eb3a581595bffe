#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace graphplay {

enum class BlockKind { kText, kFigure, kTable, kEquation };

std::string_view to_string(BlockKind kind);
std::optional<BlockKind> parse_block_kind(std::string_view s);

struct NumericCell {
  std::string row_key;
  std::string col_key;
  double value = 0.0;

  friend bool operator==(const NumericCell&, const NumericCell&) = default;
};

struct Block {
  std::string id;
  BlockKind kind = BlockKind::kText;
  // Body for text, caption for figures and tables, source form for equations.
  std::string text;
  std::optional<std::string> label;
  std::optional<std::string> image_ref;
  std::optional<std::vector<NumericCell>> numeric_cells;

  friend bool operator==(const Block&, const Block&) = default;
};

struct SectionNode {
  std::string id;
  std::string heading;
  int depth = 0;
  std::vector<SectionNode> children;
  std::vector<std::string> block_ids;

  friend bool operator==(const SectionNode&, const SectionNode&) = default;
};

struct DocumentIR {
  std::string doc_id;
  std::string title;
  std::vector<SectionNode> sections;
  std::vector<Block> blocks;

  const Block* find_block(std::string_view id) const;

  friend bool operator==(const DocumentIR&, const DocumentIR&) = default;
};

enum class FindingClass {
  kDuplicateId,
  kDanglingBlockRef,
  kOrphanBlock,
  kMultiplyAssignedBlock,
  kFigureMissingImageRef,
  kImageRefOnNonFigure,
  kNumericCellsOnNonTable,
  kNonFiniteCell,
  kDepthMismatch,
  kEmptyId,
};

std::string_view to_string(FindingClass c);

struct Finding {
  FindingClass kind;
  std::string id;  // block or section id present in the input
  std::string detail;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
};

ValidationReport validate_ir(const DocumentIR& doc);

// JSON mapping. `from_json` checks field presence and types and throws
// SchemaError carrying a JSON pointer; it does not run validate_ir.
nlohmann::json to_json(const DocumentIR& doc);
DocumentIR document_from_json(const nlohmann::json& j);

// Parse + validate. Throws ParseError on malformed JSON and SchemaError on
// missing fields or any validate_ir finding.
DocumentIR load_document(const std::filesystem::path& path);
DocumentIR parse_document(std::string_view json_text);
std::string serialize_document(const DocumentIR& doc);

// Calls `fn(section, path)` for every section in pre-order. `path` holds the
// ids from the root down to and including the section.
template <typename Fn>
void for_each_section(const std::vector<SectionNode>& roots, Fn&& fn) {
  std::vector<std::string> path;
  auto visit = [&](auto&& self, const SectionNode& s) -> void {
    path.push_back(s.id);
    fn(s, static_cast<const std::vector<std::string>&>(path));
    for (const auto& c : s.children) self(self, c);
    path.pop_back();
  };
  for (const auto& r : roots) visit(visit, r);
}

}  // namespace graphplay
