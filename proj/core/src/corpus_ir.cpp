#include "graphplay/corpus_ir.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "graphplay/error.hpp"

namespace graphplay {

using nlohmann::json;

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::kText: return "text";
    case BlockKind::kFigure: return "figure";
    case BlockKind::kTable: return "table";
    case BlockKind::kEquation: return "equation";
  }
  return "text";
}

std::optional<BlockKind> parse_block_kind(std::string_view s) {
  if (s == "text") return BlockKind::kText;
  if (s == "figure") return BlockKind::kFigure;
  if (s == "table") return BlockKind::kTable;
  if (s == "equation") return BlockKind::kEquation;
  return std::nullopt;
}

std::string_view to_string(FindingClass c) {
  switch (c) {
    case FindingClass::kDuplicateId: return "DuplicateId";
    case FindingClass::kDanglingBlockRef: return "DanglingBlockRef";
    case FindingClass::kOrphanBlock: return "OrphanBlock";
    case FindingClass::kMultiplyAssignedBlock: return "MultiplyAssignedBlock";
    case FindingClass::kFigureMissingImageRef: return "FigureMissingImageRef";
    case FindingClass::kImageRefOnNonFigure: return "ImageRefOnNonFigure";
    case FindingClass::kNumericCellsOnNonTable: return "NumericCellsOnNonTable";
    case FindingClass::kNonFiniteCell: return "NonFiniteCell";
    case FindingClass::kDepthMismatch: return "DepthMismatch";
    case FindingClass::kEmptyId: return "EmptyId";
  }
  return "Unknown";
}

const Block* DocumentIR::find_block(std::string_view id) const {
  for (const auto& b : blocks)
    if (b.id == id) return &b;
  return nullptr;
}

ValidationReport validate_ir(const DocumentIR& doc) {
  ValidationReport report;
  auto add = [&](FindingClass k, const std::string& id, std::string detail) {
    report.findings.push_back({k, id, std::move(detail)});
  };

  std::map<std::string, int> block_count;
  for (const auto& b : doc.blocks) {
    if (b.id.empty()) add(FindingClass::kEmptyId, b.id, "block with empty id");
    if (++block_count[b.id] == 2)
      add(FindingClass::kDuplicateId, b.id, "block id appears more than once");
    if (b.kind == BlockKind::kFigure && !b.image_ref)
      add(FindingClass::kFigureMissingImageRef, b.id,
          "figure block lacks image_ref");
    if (b.kind != BlockKind::kFigure && b.image_ref)
      add(FindingClass::kImageRefOnNonFigure, b.id,
          "image_ref only allowed on figure blocks");
    if (b.numeric_cells && b.kind != BlockKind::kTable)
      add(FindingClass::kNumericCellsOnNonTable, b.id,
          "numeric_cells only allowed on table blocks");
    if (b.numeric_cells) {
      for (const auto& cell : *b.numeric_cells) {
        if (!std::isfinite(cell.value)) {
          add(FindingClass::kNonFiniteCell, b.id,
              "cell (" + cell.row_key + ", " + cell.col_key + ") not finite");
        }
      }
    }
  }

  std::map<std::string, int> section_count;
  std::map<std::string, int> assigned;
  auto visit = [&](auto&& self, const SectionNode& s, int expected_depth)
      -> void {
    if (++section_count[s.id] == 2)
      add(FindingClass::kDuplicateId, s.id, "section id appears more than once");
    if (block_count.count(s.id) && section_count[s.id] == 1)
      add(FindingClass::kDuplicateId, s.id, "section id collides with a block id");
    if (s.depth != expected_depth)
      add(FindingClass::kDepthMismatch, s.id,
          "depth " + std::to_string(s.depth) + ", expected " +
              std::to_string(expected_depth));
    for (const auto& bid : s.block_ids) {
      if (!block_count.count(bid)) {
        add(FindingClass::kDanglingBlockRef, s.id,
            "references missing block '" + bid + "'");
      } else if (++assigned[bid] == 2) {
        add(FindingClass::kMultiplyAssignedBlock, bid,
            "block listed by more than one section");
      }
    }
    for (const auto& c : s.children) self(self, c, expected_depth + 1);
  };
  for (const auto& s : doc.sections) visit(visit, s, 0);

  std::set<std::string> reported;
  for (const auto& b : doc.blocks) {
    if (!assigned.count(b.id) && reported.insert(b.id).second)
      add(FindingClass::kOrphanBlock, b.id, "block belongs to no section");
  }
  return report;
}

namespace {

json section_to_json(const SectionNode& s) {
  json children = json::array();
  for (const auto& c : s.children) children.push_back(section_to_json(c));
  return json{{"id", s.id},
              {"heading", s.heading},
              {"depth", s.depth},
              {"children", std::move(children)},
              {"block_ids", s.block_ids}};
}

const json& require(const json& j, const char* key, const std::string& ptr,
                    json::value_t type) {
  if (!j.is_object())
    throw SchemaError(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(ptr + "/" + key, "missing required field");
  bool type_ok = it->type() == type ||
                 (type == json::value_t::number_float && it->is_number()) ||
                 (type == json::value_t::number_integer &&
                  it->is_number_integer());
  if (!type_ok)
    throw SchemaError(ptr + "/" + key,
                      std::string("expected ") + json(type).type_name());
  return *it;
}

std::string require_string(const json& j, const char* key,
                           const std::string& ptr) {
  return require(j, key, ptr, json::value_t::string).get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key,
                                           const std::string& ptr) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw SchemaError(ptr + "/" + key, "expected string");
  return it->get<std::string>();
}

SectionNode section_from_json(const json& j, const std::string& ptr,
                              int depth) {
  SectionNode s;
  s.id = require_string(j, "id", ptr);
  s.heading = j.contains("heading") ? require_string(j, "heading", ptr) : "";
  s.depth = j.contains("depth")
                ? require(j, "depth", ptr, json::value_t::number_integer)
                      .get<int>()
                : depth;
  if (j.contains("block_ids")) {
    const auto& ids = require(j, "block_ids", ptr, json::value_t::array);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!ids[i].is_string())
        throw SchemaError(ptr + "/block_ids/" + std::to_string(i),
                          "expected string");
      s.block_ids.push_back(ids[i].get<std::string>());
    }
  }
  if (j.contains("children")) {
    const auto& kids = require(j, "children", ptr, json::value_t::array);
    for (std::size_t i = 0; i < kids.size(); ++i)
      s.children.push_back(section_from_json(
          kids[i], ptr + "/children/" + std::to_string(i), depth + 1));
  }
  return s;
}

Block block_from_json(const json& j, const std::string& ptr) {
  Block b;
  b.id = require_string(j, "id", ptr);
  std::string kind = require_string(j, "kind", ptr);
  auto parsed = parse_block_kind(kind);
  if (!parsed)
    throw SchemaError(ptr + "/kind", "unknown block kind '" + kind + "'");
  b.kind = *parsed;
  b.text = require_string(j, "text", ptr);
  b.label = optional_string(j, "label", ptr);
  b.image_ref = optional_string(j, "image_ref", ptr);
  auto it = j.find("numeric_cells");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_array())
      throw SchemaError(ptr + "/numeric_cells", "expected array");
    std::vector<NumericCell> cells;
    for (std::size_t i = 0; i < it->size(); ++i) {
      std::string cptr = ptr + "/numeric_cells/" + std::to_string(i);
      const json& c = (*it)[i];
      NumericCell cell;
      cell.row_key = require_string(c, "row", cptr);
      cell.col_key = require_string(c, "col", cptr);
      cell.value =
          require(c, "value", cptr, json::value_t::number_float).get<double>();
      cells.push_back(std::move(cell));
    }
    b.numeric_cells = std::move(cells);
  }
  return b;
}

}  // namespace

json to_json(const DocumentIR& doc) {
  json sections = json::array();
  for (const auto& s : doc.sections) sections.push_back(section_to_json(s));
  json blocks = json::array();
  for (const auto& b : doc.blocks) {
    json jb{{"id", b.id}, {"kind", to_string(b.kind)}, {"text", b.text}};
    if (b.label) jb["label"] = *b.label;
    if (b.image_ref) jb["image_ref"] = *b.image_ref;
    if (b.numeric_cells) {
      json cells = json::array();
      for (const auto& c : *b.numeric_cells)
        cells.push_back({{"row", c.row_key}, {"col", c.col_key}, {"value", c.value}});
      jb["numeric_cells"] = std::move(cells);
    }
    blocks.push_back(std::move(jb));
  }
  return json{{"doc_id", doc.doc_id},
              {"title", doc.title},
              {"sections", std::move(sections)},
              {"blocks", std::move(blocks)}};
}

DocumentIR document_from_json(const json& j) {
  DocumentIR doc;
  doc.doc_id = require_string(j, "doc_id", "");
  doc.title = require_string(j, "title", "");
  const auto& sections = require(j, "sections", "", json::value_t::array);
  for (std::size_t i = 0; i < sections.size(); ++i)
    doc.sections.push_back(
        section_from_json(sections[i], "/sections/" + std::to_string(i), 0));
  const auto& blocks = require(j, "blocks", "", json::value_t::array);
  for (std::size_t i = 0; i < blocks.size(); ++i)
    doc.blocks.push_back(
        block_from_json(blocks[i], "/blocks/" + std::to_string(i)));
  return doc;
}

DocumentIR parse_document(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed IR JSON: ") + e.what());
  }
  DocumentIR doc = document_from_json(j);
  auto report = validate_ir(doc);
  if (!report.ok()) {
    const auto& f = report.findings.front();
    std::string msg = std::string(to_string(f.kind)) + ": " + f.detail;
    if (report.findings.size() > 1)
      msg += " (+" + std::to_string(report.findings.size() - 1) + " more)";
    throw SchemaError(doc.doc_id + "#" + f.id, msg);
  }
  return doc;
}

DocumentIR load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

std::string serialize_document(const DocumentIR& doc) {
  return to_json(doc).dump(2) + "\n";
}

}  // namespace graphplay
