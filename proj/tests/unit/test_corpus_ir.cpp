#include <doctest.h>

#include <algorithm>

#include "graphplay/corpus_ir.hpp"
#include "graphplay/error.hpp"
#include "test_support.hpp"

using namespace graphplay;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "doc_id": "d", "title": "T",
    "sections": [{"id": "s1", "heading": "1 Intro", "children": [], "block_ids": ["b1", "f1"]}],
    "blocks": [
      {"id": "b1", "kind": "text", "text": "Hello."},
      {"id": "f1", "kind": "figure", "label": "Figure 1", "image_ref": "f1.png", "text": "Cap."}
    ]})");
}

bool has(const ValidationReport& r, FindingClass k, const std::string& id) {
  return std::any_of(r.findings.begin(), r.findings.end(),
                     [&](const Finding& f) { return f.kind == k && f.id == id; });
}

}  // namespace

TEST_CASE("fixture documents load and round-trip") {
  for (auto name : {"paperA", "paperB", "paperC"}) {
    auto doc = load_document(testsupport::fixture(std::string("corpus/") + name + ".json"));
    CHECK(doc.doc_id == name);
    CHECK(validate_ir(doc).ok());
    CHECK(parse_document(serialize_document(doc)) == doc);
  }
}

TEST_CASE("paperA carries figure, table and equation blocks") {
  auto doc = load_document(testsupport::fixture("corpus/paperA.json"));
  CHECK(doc.sections.size() == 3);
  CHECK(doc.blocks.size() == 7);
  const Block* tab = doc.find_block("tab1");
  REQUIRE(tab);
  CHECK(tab->kind == BlockKind::kTable);
  REQUIRE(tab->numeric_cells);
  CHECK((*tab->numeric_cells)[0] == NumericCell{"graph", "accuracy", 93.0});
  CHECK(doc.find_block("missing") == nullptr);
}

TEST_CASE("depth is computed when absent and checked when present") {
  auto j = minimal();
  j["sections"][0]["children"] = json::array(
      {{{"id", "s1a"}, {"heading", "1.1 Sub"}, {"children", json::array()},
        {"block_ids", json::array()}}});
  auto doc = document_from_json(j);
  CHECK(doc.sections[0].children[0].depth == 1);
  j["sections"][0]["children"][0]["depth"] = 3;
  CHECK(has(validate_ir(document_from_json(j)), FindingClass::kDepthMismatch, "s1a"));
}

TEST_CASE("validation findings") {
  SUBCASE("duplicate id") {
    auto j = minimal();
    j["blocks"][1]["id"] = "b1";
    j["sections"][0]["block_ids"] = {"b1"};
    CHECK(has(validate_ir(document_from_json(j)), FindingClass::kDuplicateId, "b1"));
  }
  SUBCASE("dangling and orphan") {
    auto j = minimal();
    j["sections"][0]["block_ids"] = {"b1", "zz"};
    auto r = validate_ir(document_from_json(j));
    CHECK(has(r, FindingClass::kDanglingBlockRef, "s1"));
    CHECK(has(r, FindingClass::kOrphanBlock, "f1"));
  }
  SUBCASE("figure without image") {
    auto j = minimal();
    j["blocks"][1].erase("image_ref");
    CHECK(has(validate_ir(document_from_json(j)), FindingClass::kFigureMissingImageRef, "f1"));
  }
  SUBCASE("numeric cells on a text block") {
    auto j = minimal();
    j["blocks"][0]["numeric_cells"] = json::array({{{"row", "r"}, {"col", "c"}, {"value", 1.0}}});
    CHECK(has(validate_ir(document_from_json(j)), FindingClass::kNumericCellsOnNonTable, "b1"));
  }
  SUBCASE("block in two sections") {
    auto j = minimal();
    j["sections"].push_back({{"id", "s2"}, {"heading", "2 X"}, {"children", json::array()},
                             {"block_ids", {"b1"}}});
    CHECK(has(validate_ir(document_from_json(j)), FindingClass::kMultiplyAssignedBlock, "b1"));
  }
}

TEST_CASE("schema errors carry a JSON pointer") {
  auto j = minimal();
  j["blocks"][1].erase("text");
  try {
    document_from_json(j);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.where() == "/blocks/1/text");
  }
  j = minimal();
  j["blocks"][0]["kind"] = "video";
  CHECK_THROWS_AS(document_from_json(j), SchemaError);
}

TEST_CASE("parse_document rejects bad JSON and invalid IR") {
  CHECK_THROWS_AS(parse_document("{not json"), ParseError);
  auto j = minimal();
  j["sections"][0]["block_ids"] = {"b1"};
  CHECK_THROWS_AS(parse_document(j.dump()), SchemaError);
  CHECK_THROWS_AS(load_document("/nonexistent/doc.json"), ParseError);
}
