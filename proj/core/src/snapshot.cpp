#include <fstream>
#include <sstream>

#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"
#include "graphplay/kg_store.hpp"

namespace graphplay {

using nlohmann::json;

json to_json(const KGNode& node) {
  json facts = json::array();
  for (const auto& f : node.facts) {
    if (f.kind == FactKind::kNumeric)
      facts.push_back({{"kind", "numeric"}, {"value", f.number}, {"context", f.context}});
    else
      facts.push_back({{"kind", "term"}, {"value", f.term}, {"context", f.context}});
  }
  json j{{"id", node.node_id},
         {"type", to_string(node.type)},
         {"doc_id", node.doc_id},
         {"content", node.content},
         {"facts", std::move(facts)},
         {"attrs", node.attrs}};
  if (node.embedding) j["embedding"] = *node.embedding;
  return j;
}

json to_json(const KGEdge& edge) {
  return json{{"src", edge.src},
              {"dst", edge.dst},
              {"type", to_string(edge.type)},
              {"confidence", edge.confidence}};
}

KGNode node_from_json(const json& j) {
  KGNode n;
  try {
    n.node_id = j.at("id").get<std::string>();
    auto type = parse_node_type(j.at("type").get<std::string>());
    if (!type) throw SchemaError(n.node_id, "unknown node type");
    n.type = *type;
    n.doc_id = j.at("doc_id").get<std::string>();
    n.content = j.at("content").get<std::string>();
    for (const auto& f : j.at("facts")) {
      const std::string kind = f.at("kind").get<std::string>();
      std::string ctx = f.value("context", std::string());
      if (kind == "numeric")
        n.facts.push_back(Fact::numeric(f.at("value").get<double>(), ctx));
      else if (kind == "term")
        n.facts.push_back(Fact::term_fact(f.at("value").get<std::string>(), ctx));
      else
        throw SchemaError(n.node_id, "unknown fact kind '" + kind + "'");
    }
    if (j.contains("attrs"))
      n.attrs = j.at("attrs").get<std::map<std::string, std::string>>();
    if (j.contains("embedding"))
      n.embedding = j.at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw SchemaError(n.node_id, std::string("malformed node: ") + e.what());
  }
  return n;
}

KGEdge edge_from_json(const json& j) {
  KGEdge e;
  try {
    e.src = j.at("src").get<std::string>();
    e.dst = j.at("dst").get<std::string>();
    auto type = parse_edge_type(j.at("type").get<std::string>());
    if (!type) throw SchemaError(e.src + "->" + e.dst, "unknown edge type");
    e.type = *type;
    e.confidence = j.at("confidence").get<double>();
  } catch (const json::exception& ex) {
    throw SchemaError(e.src + "->" + e.dst,
                      std::string("malformed edge: ") + ex.what());
  }
  return e;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << data;
  if (!out) throw Error("write failed for " + p.string());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save_snapshot(const KnowledgeGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string nodes;
  for (const auto& [id, node] : g.nodes()) nodes += to_json(node).dump() + "\n";
  std::string edges;
  for (const auto& [key, edge] : g.edges()) edges += to_json(edge).dump() + "\n";
  std::uint64_t content = fnv1a64(edges, fnv1a64(nodes));
  json manifest{{"schema_version", kSnapshotSchemaVersion},
                {"corpus_hash", g.corpus_hash()},
                {"content_hash", to_hex(content)},
                {"node_count", g.node_count()},
                {"edge_count", g.edge_count()},
                {"graph_version", g.version()}};
  write_file(dir / "nodes.jsonl", nodes);
  write_file(dir / "edges.jsonl", edges);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

KnowledgeGraph load_snapshot(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw ParseError("malformed manifest in " + dir.string() + ": " + e.what());
  }
  if (manifest.value("schema_version", -1) != kSnapshotSchemaVersion)
    throw SchemaError((dir / "manifest.json").string(),
                      "unsupported schema_version");
  const std::string nodes = read_file(dir / "nodes.jsonl");
  const std::string edges = read_file(dir / "edges.jsonl");
  const std::string expected = manifest.value("content_hash", std::string());
  if (!expected.empty() && to_hex(fnv1a64(edges, fnv1a64(nodes))) != expected)
    throw SchemaError((dir / "manifest.json").string(),
                      "content_hash does not match nodes/edges files");

  KnowledgeGraph g;
  g.set_corpus_hash(manifest.value("corpus_hash", std::string()));
  g.set_version(manifest.value("graph_version", std::uint64_t{0}));

  auto for_each_line = [&](const std::string& data, const char* file,
                           auto&& fn) {
    std::istringstream in(data);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::string where = std::string(file) + ":" + std::to_string(lineno);
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
      }
      try {
        fn(j);
      } catch (const InvariantError& e) {
        throw SchemaError(where, e.what());
      } catch (const SchemaError& e) {
        throw SchemaError(where, e.what());
      }
    }
  };
  for_each_line(nodes, "nodes.jsonl",
                [&](const json& j) { g.upsert_node(node_from_json(j)); });
  for_each_line(edges, "edges.jsonl",
                [&](const json& j) { g.upsert_edge(edge_from_json(j)); });
  return g;
}

}  // namespace graphplay
