#include "graphplay/construct.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"
#include "graphplay/text.hpp"

namespace graphplay {

std::vector<std::string> ConstructConfig::default_reference_patterns() {
  return {
      R"((Figure|Fig\.?)\s*(\d+))",
      R"(Table\s*(\d+))",
      R"((Equation|Eq\.?)\s*\(?(\d+)\)?)",
      R"(Section\s*(\d+(\.\d+)*))",
  };
}

void ConstructConfig::validate() const {
  auto unit = [](double x, const char* name) {
    if (!(x > 0.0 && x <= 1.0))
      throw ConfigError(std::string(name) + " must lie in (0,1]");
  };
  unit(tau_semantic, "tau_semantic");
  unit(tau_cross, "tau_cross");
  unit(reference_confidence, "reference_confidence");
  unit(extraction_confidence, "extraction_confidence");
  if (max_edges_per_node < 1) throw ConfigError("max_edges_per_node must be >= 1");
  if (concept_min_freq < 1) throw ConfigError("concept_min_freq must be >= 1");
  for (const auto& p : reference_patterns) {
    try {
      std::regex re(p, std::regex::icase);
    } catch (const std::regex_error& e) {
      throw ConfigError("bad reference pattern '" + p + "': " + e.what());
    }
  }
}

nlohmann::json ConstructionReport::to_json() const {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& x : findings)
    f.push_back({{"kind", x.kind},
                 {"doc_id", x.doc_id},
                 {"node_id", x.node_id},
                 {"detail", x.detail}});
  nlohmann::json c = nlohmann::json::array();
  for (const auto& x : classified)
    c.push_back({{"src", x.pair.first},
                 {"dst", x.pair.second},
                 {"label", to_string(x.label)},
                 {"confidence", x.confidence}});
  return {{"findings", f},
          {"classified", c},
          {"classifier_calls", classifier_calls}};
}

std::string block_node_id(std::string_view doc_id, std::string_view block_id) {
  return std::string(doc_id) + "/" + std::string(block_id);
}
std::string caption_node_id(std::string_view doc_id, std::string_view block_id) {
  return block_node_id(doc_id, block_id) + "#caption";
}
std::string heading_node_id(std::string_view doc_id,
                            std::string_view section_id) {
  return block_node_id(doc_id, section_id) + "#heading";
}

std::vector<Fact> lexical_facts(std::string_view content,
                                std::string_view context) {
  std::vector<Fact> facts;
  std::set<double> seen;
  for (const auto& n : text::extract_numbers(content))
    if (seen.insert(n.value).second)
      facts.push_back(Fact::numeric(n.value, std::string(context)));
  for (const auto& k : text::keywords(content))
    facts.push_back(Fact::term_fact(k, std::string(context)));
  return facts;
}

namespace {

NodeType node_type_for(BlockKind k) {
  switch (k) {
    case BlockKind::kText: return NodeType::kTextBlock;
    case BlockKind::kFigure: return NodeType::kFigure;
    case BlockKind::kTable: return NodeType::kTable;
    case BlockKind::kEquation: return NodeType::kEquation;
  }
  return NodeType::kTextBlock;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void add_facts(std::vector<Fact>& into, std::vector<Fact> more) {
  for (auto& f : more) {
    if (std::find(into.begin(), into.end(), f) == into.end())
      into.push_back(std::move(f));
  }
}

// Reference target key: ("figure", "3"), ("table", "2"), ...
using RefKey = std::pair<std::string, std::string>;

std::optional<RefKey> ref_key_from_match(const std::smatch& m) {
  std::string head = text::to_lower(m.str(0));
  std::string kind;
  if (head.rfind("fig", 0) == 0) kind = "figure";
  else if (head.rfind("tab", 0) == 0) kind = "table";
  else if (head.rfind("eq", 0) == 0) kind = "equation";
  else if (head.rfind("sec", 0) == 0) kind = "section";
  else return std::nullopt;
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (m[i].matched && m[i].length() > 0 && std::isdigit(
            static_cast<unsigned char>(m[i].str().front())))
      return RefKey{kind, m[i].str()};
  }
  return std::nullopt;
}

std::vector<std::regex> compile_patterns(const std::vector<std::string>& pats) {
  std::vector<std::regex> out;
  out.reserve(pats.size());
  for (const auto& p : pats)
    out.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
  return out;
}

std::optional<RefKey> ref_key_of_label(const std::string& label,
                                       const std::vector<std::regex>& pats) {
  for (const auto& re : pats) {
    std::smatch m;
    if (std::regex_search(label, m, re))
      if (auto key = ref_key_from_match(m)) return key;
  }
  return std::nullopt;
}

std::optional<std::string> section_number(const std::string& heading) {
  static const std::regex kNumbered(R"(^\s*(\d+(\.\d+)*)(\s|\.|$))");
  std::smatch m;
  if (std::regex_search(heading, m, kNumbered)) return m.str(1);
  return std::nullopt;
}

// Token with the case and separator information the concept extractor
// needs.
struct CasedToken {
  std::string lower;
  bool capitalized = false;
  bool has_alpha = false;
  bool joined = false;  // only whitespace separates it from the previous token
};

std::vector<CasedToken> cased_tokens(std::string_view sentence) {
  std::vector<CasedToken> out;
  std::size_t i = 0, n = sentence.size();
  bool whitespace_only = true;
  while (i < n) {
    unsigned char c = sentence[i];
    bool alnum = std::isalnum(c) || c >= 0x80;
    if (!alnum) {
      if (!std::isspace(c)) whitespace_only = false;
      ++i;
      continue;
    }
    std::size_t j = i;
    CasedToken t;
    t.capitalized = c >= 'A' && c <= 'Z';
    while (j < n && (std::isalnum(static_cast<unsigned char>(sentence[j])) ||
                     static_cast<unsigned char>(sentence[j]) >= 0x80)) {
      unsigned char d = sentence[j];
      if (std::isalpha(d) || d >= 0x80) t.has_alpha = true;
      t.lower.push_back(static_cast<char>(std::tolower(d)));
      ++j;
    }
    t.joined = !out.empty() && whitespace_only;
    out.push_back(std::move(t));
    whitespace_only = true;
    i = j;
  }
  return out;
}

bool is_content_token(const CasedToken& t) {
  return t.has_alpha && t.lower.size() >= 3 && !text::is_stopword(t.lower);
}

bool ends_nounish(const std::string& tok) {
  auto ends = [&](std::string_view suf) {
    return tok.size() > suf.size() &&
           tok.compare(tok.size() - suf.size(), suf.size(), suf) == 0;
  };
  return !ends("ly") && !ends("ed");
}

bool contains_phrase(const std::string& longer, const std::string& shorter) {
  return longer != shorter &&
         text::find_word(longer, shorter) != std::string_view::npos;
}

struct PhraseStats {
  int freq = 0;
  std::set<std::string> blocks;  // block node ids, sorted
};

constexpr std::array<std::string_view, 24> kClaimCues = {
    "outperforms", "outperform",  "improves",   "improve",   "improved",
    "achieves",    "achieve",     "demonstrate", "demonstrates", "show that",
    "shows that",  "better than", "worse than", "higher than", "lower than",
    "contradicts", "contradict",  "reduces",    "increases", "significantly",
    "fails",       "degrades",    "surpasses",  "confirms",
};

}  // namespace

KnowledgeGraph build_structural(const DocumentIR& doc) {
  KnowledgeGraph g;
  const auto& id = doc.doc_id;

  std::map<std::string, std::string> section_path_of_block;
  std::map<std::string, std::string> section_of_block;
  for_each_section(doc.sections, [&](const SectionNode& s,
                                     const std::vector<std::string>& path) {
    for (const auto& bid : s.block_ids) {
      section_path_of_block[bid] = join(path, "/");
      section_of_block[bid] = s.id;
    }
  });

  for (const auto& b : doc.blocks) {
    KGNode n;
    n.node_id = block_node_id(id, b.id);
    n.type = node_type_for(b.kind);
    n.doc_id = id;
    n.content = b.text;
    n.attrs["role"] = "block";
    n.attrs["block_id"] = b.id;
    n.attrs["section_path"] = section_path_of_block[b.id];
    if (b.label) n.attrs["label"] = *b.label;
    if (b.image_ref) n.attrs["image_ref"] = *b.image_ref;
    n.facts = lexical_facts(b.text, b.id);
    if (b.label) add_facts(n.facts, lexical_facts(*b.label, b.id));
    if (b.numeric_cells) {
      for (const auto& cell : *b.numeric_cells) {
        add_facts(n.facts, {Fact::numeric(cell.value,
                                          cell.row_key + " | " + cell.col_key)});
        add_facts(n.facts, lexical_facts(cell.row_key, b.id));
        add_facts(n.facts, lexical_facts(cell.col_key, b.id));
      }
    }
    g.upsert_node(std::move(n));

    if ((b.kind == BlockKind::kFigure || b.kind == BlockKind::kTable) &&
        !text::trim(b.text).empty()) {
      KGNode cap;
      cap.node_id = caption_node_id(id, b.id);
      cap.type = NodeType::kTextBlock;
      cap.doc_id = id;
      cap.content = b.text;
      cap.attrs["role"] = "caption";
      cap.attrs["caption_of"] = block_node_id(id, b.id);
      cap.attrs["section_path"] = section_path_of_block[b.id];
      cap.facts = lexical_facts(b.text, b.id);
      g.upsert_node(std::move(cap));
      g.upsert_edge({block_node_id(id, b.id), caption_node_id(id, b.id),
                     EdgeType::kHasCaption, 1.0});
    }
  }

  // Titled sections get a heading surrogate; untitled ones exist only as
  // section_path metadata on their blocks.
  auto visit = [&](auto&& self, const SectionNode& s,
                   std::vector<std::string>& path,
                   const std::string& enclosing) -> void {
    path.push_back(s.id);
    std::string container = enclosing;
    if (!text::trim(s.heading).empty()) {
      KGNode h;
      h.node_id = heading_node_id(id, s.id);
      h.type = NodeType::kTextBlock;
      h.doc_id = id;
      h.content = s.heading;
      h.attrs["role"] = "heading";
      h.attrs["section_id"] = s.id;
      h.attrs["section_path"] = join(path, "/");
      h.attrs["depth"] = std::to_string(s.depth);
      if (auto num = section_number(s.heading)) h.attrs["section_number"] = *num;
      h.facts = lexical_facts(s.heading, s.id);
      g.upsert_node(std::move(h));
      if (!enclosing.empty())
        g.upsert_edge({enclosing, heading_node_id(id, s.id), EdgeType::kContains, 1.0});
      container = heading_node_id(id, s.id);
    }
    if (!container.empty()) {
      for (const auto& bid : s.block_ids)
        g.upsert_edge({container, block_node_id(id, bid), EdgeType::kContains, 1.0});
    }
    for (const auto& c : s.children) self(self, c, path, container);
    path.pop_back();
  };
  std::vector<std::string> path;
  for (const auto& s : doc.sections) visit(visit, s, path, "");
  return g;
}

void build_reference(const DocumentIR& doc, KnowledgeGraph& g,
                     const ConstructConfig& cfg, ConstructionReport& report) {
  const auto patterns = compile_patterns(cfg.reference_patterns);

  std::map<RefKey, std::string> targets;
  for (const auto& b : doc.blocks) {
    if (b.kind == BlockKind::kText || !b.label) continue;
    if (auto key = ref_key_of_label(*b.label, patterns))
      targets.emplace(*key, block_node_id(doc.doc_id, b.id));
  }
  for_each_section(doc.sections, [&](const SectionNode& s, const auto&) {
    if (auto num = section_number(s.heading))
      targets.emplace(RefKey{"section", *num}, heading_node_id(doc.doc_id, s.id));
  });

  for (const auto& b : doc.blocks) {
    if (b.kind != BlockKind::kText) continue;
    const std::string src = block_node_id(doc.doc_id, b.id);
    for (const auto& re : patterns) {
      for (auto it = std::sregex_iterator(b.text.begin(), b.text.end(), re);
           it != std::sregex_iterator(); ++it) {
        auto key = ref_key_from_match(*it);
        if (!key) continue;
        auto t = targets.find(*key);
        if (t == targets.end()) {
          report.findings.push_back({"DanglingReference", doc.doc_id, src,
                                     "no target for '" + it->str(0) + "'"});
          continue;
        }
        if (t->second == src) continue;
        g.upsert_edge({src, t->second, EdgeType::kReferences,
                       cfg.reference_confidence});
      }
    }
  }
}

void extract_concepts(const DocumentIR& doc, KnowledgeGraph& g,
                      const ConstructConfig& cfg) {
  std::map<std::string, PhraseStats> phrases;
  std::map<std::string, PhraseStats> spans;

  for (const auto& b : doc.blocks) {
    if (b.kind != BlockKind::kText) continue;
    const std::string block_node = block_node_id(doc.doc_id, b.id);
    const auto sents = text::sentences(b.text);
    for (std::size_t si = 0; si < sents.size(); ++si) {
      const auto toks = cased_tokens(sents[si]);

      // Content-word n-grams (n <= 3) inside runs of joined content tokens.
      std::size_t i = 0;
      while (i < toks.size()) {
        if (!is_content_token(toks[i])) {
          ++i;
          continue;
        }
        std::size_t j = i + 1;
        while (j < toks.size() && toks[j].joined && is_content_token(toks[j])) ++j;
        for (std::size_t a = i; a < j; ++a) {
          std::string key;
          for (std::size_t len = 1; len <= 3 && a + len <= j; ++len) {
            if (len > 1) key += ' ';
            key += toks[a + len - 1].lower;
            if (!ends_nounish(toks[a + len - 1].lower)) continue;
            auto& st = phrases[key];
            ++st.freq;
            st.blocks.insert(block_node);
          }
        }
        i = j;
      }

      // Maximal capitalized multi-word spans, leading stopwords stripped.
      i = 0;
      while (i < toks.size()) {
        if (!toks[i].capitalized) {
          ++i;
          continue;
        }
        std::size_t j = i + 1;
        while (j < toks.size() && toks[j].joined && toks[j].capitalized) ++j;
        std::size_t a = i;
        while (a < j && text::is_stopword(toks[a].lower)) ++a;
        if (j - a >= 2) {
          std::string key;
          for (std::size_t k = a; k < j; ++k) {
            if (k > a) key += ' ';
            key += toks[k].lower;
          }
          auto& st = spans[key];
          ++st.freq;
          st.blocks.insert(block_node);
        }
        i = j;
      }

      // Claims.
      bool is_claim = false;
      for (auto cue : kClaimCues)
        if (text::find_word(sents[si], cue) != std::string_view::npos) {
          is_claim = true;
          break;
        }
      if (is_claim) {
        KGNode c;
        c.node_id = doc.doc_id + "/claim/" + b.id + "." + std::to_string(si);
        c.type = NodeType::kClaim;
        c.doc_id = doc.doc_id;
        c.content = sents[si];
        c.attrs["role"] = "claim";
        c.attrs["source"] = block_node;
        c.facts = lexical_facts(sents[si], b.id);
        std::string cid = c.node_id;
        g.upsert_node(std::move(c));
        g.upsert_edge({cid, block_node, EdgeType::kDerivesFrom,
                       cfg.extraction_confidence});
      }
    }
  }

  std::map<std::string, PhraseStats> candidates = phrases;
  for (const auto& [key, st] : spans) {
    auto& merged = candidates[key];
    merged.freq = std::max(merged.freq, st.freq);
    merged.blocks.insert(st.blocks.begin(), st.blocks.end());
  }
  std::vector<std::string> frequent;
  for (const auto& [key, st] : candidates)
    if (st.freq >= cfg.concept_min_freq) frequent.push_back(key);

  for (const auto& key : frequent) {
    const auto& st = candidates.at(key);
    bool subsumed = std::any_of(frequent.begin(), frequent.end(), [&](const auto& other) {
      return contains_phrase(other, key) && candidates.at(other).freq >= st.freq;
    });
    if (subsumed) continue;
    std::string slug = text::slugify(key);
    if (slug.empty()) slug = to_hex(fnv1a64(key));
    KGNode c;
    c.node_id = doc.doc_id + "/concept/" + slug;
    c.type = NodeType::kConcept;
    c.doc_id = doc.doc_id;
    c.content = key;
    c.attrs["role"] = "concept";
    c.attrs["frequency"] = std::to_string(st.freq);
    c.facts = lexical_facts(key, "concept");
    std::string cid = c.node_id;
    g.upsert_node(std::move(c));
    for (const auto& block : st.blocks)
      g.upsert_edge({block, cid, EdgeType::kDefines, cfg.extraction_confidence});
  }
}

namespace {

bool in_source_set(NodeType t) {
  return t == NodeType::kTextBlock || t == NodeType::kClaim ||
         t == NodeType::kConcept;
}
bool in_target_set(NodeType t) {
  return t == NodeType::kFigure || t == NodeType::kTable ||
         t == NodeType::kEquation || t == NodeType::kClaim ||
         t == NodeType::kTextBlock;
}

bool linked(const KnowledgeGraph& g, const std::string& a, const std::string& b) {
  for (const auto& key : g.incident_edges(a))
    if (key.src == b || key.dst == b) return true;
  return false;
}

}  // namespace

void build_semantic(KnowledgeGraph& g, Embedder& embedder,
                    RelationClassifier& classifier, const ConstructConfig& cfg,
                    ConstructionReport* report) {
  std::vector<const KGNode*> pool;
  for (const auto& [id, n] : g.nodes())
    if (in_source_set(n.type) || in_target_set(n.type)) pool.push_back(&n);
  if (pool.size() < 2) return;

  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto* n : pool) texts.push_back(n->content);
  const auto vecs = embedder.embed(texts);

  struct Candidate {
    double sim;
    std::string src, dst;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (vecs[i].norm() == 0.0) continue;
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const KGNode& a = *pool[i];
      const KGNode& b = *pool[j];
      if (a.doc_id != b.doc_id || vecs[j].norm() == 0.0) continue;
      const KGNode* src = nullptr;
      const KGNode* dst = nullptr;
      if (in_source_set(a.type) && in_target_set(b.type)) {
        src = &a;
        dst = &b;
      } else if (in_source_set(b.type) && in_target_set(a.type)) {
        src = &b;
        dst = &a;
      } else {
        continue;
      }
      double sim = cosine(vecs[i], vecs[j]);
      if (sim < cfg.tau_semantic) continue;
      if (linked(g, a.node_id, b.node_id)) continue;
      candidates.push_back({sim, src->node_id, dst->node_id});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) {
              if (x.sim != y.sim) return x.sim > y.sim;
              if (x.src != y.src) return x.src < y.src;
              return x.dst < y.dst;
            });

  const EdgeTypeSet semantic = semantic_edge_types();
  std::map<std::string, int> load;
  for (const auto& [key, e] : g.edges()) {
    if (!semantic.contains(key.type)) continue;
    ++load[key.src];
    ++load[key.dst];
  }

  for (const auto& c : candidates) {
    if (load[c.src] >= cfg.max_edges_per_node ||
        load[c.dst] >= cfg.max_edges_per_node)
      continue;
    RelationVerdict v = classifier.classify(g.node(c.src), g.node(c.dst));
    if (report) {
      ++report->classifier_calls;
      report->classified.push_back({{c.src, c.dst}, v.label, v.confidence});
    }
    auto type = to_edge_type(v.label);
    if (!type) continue;
    if (!(v.confidence >= 0.0 && v.confidence <= 1.0))
      throw ProtocolError("classifier confidence outside [0,1] for " + c.src +
                          " -> " + c.dst);
    g.upsert_edge({c.src, c.dst, *type, v.confidence});
    ++load[c.src];
    ++load[c.dst];
  }
}

KnowledgeGraph build_document_graph(const DocumentIR& doc, Embedder& embedder,
                                    RelationClassifier& classifier,
                                    const ConstructConfig& cfg,
                                    ConstructionReport& report) {
  KnowledgeGraph g = build_structural(doc);
  build_reference(doc, g, cfg, report);
  extract_concepts(doc, g, cfg);
  build_semantic(g, embedder, classifier, cfg, &report);
  g.set_corpus_hash(to_hex(fnv1a64(serialize_document(doc))));
  return g;
}

KnowledgeGraph federate(std::span<const KnowledgeGraph> graphs,
                        Embedder& embedder, double tau_cross) {
  if (graphs.empty()) return {};
  if (graphs.size() == 1) return graphs.front();

  KnowledgeGraph out;
  std::vector<std::string> hashes;
  for (const auto& g : graphs) {
    for (const auto& [id, n] : g.nodes()) {
      if (out.contains_node(id))
        throw InvariantError("node id collision across documents: " + id);
      out.upsert_node(n);
    }
    hashes.push_back(g.corpus_hash());
  }
  for (const auto& g : graphs)
    for (const auto& [key, e] : g.edges()) out.upsert_edge(e);
  std::sort(hashes.begin(), hashes.end());
  std::string joined;
  for (const auto& h : hashes) joined += h + ";";
  out.set_corpus_hash(to_hex(fnv1a64(joined)));

  std::vector<const KGNode*> pool;
  for (const auto& [id, n] : out.nodes())
    if (n.type == NodeType::kConcept || n.type == NodeType::kClaim ||
        n.type == NodeType::kTextBlock)
      pool.push_back(&n);
  if (pool.size() < 2) return out;
  std::vector<std::string> texts;
  for (const auto* n : pool) texts.push_back(n->content);
  const auto vecs = embedder.embed(texts);

  std::vector<KGEdge> links;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (vecs[i].norm() == 0.0) continue;
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      if (pool[i]->doc_id == pool[j]->doc_id || vecs[j].norm() == 0.0) continue;
      double sim = cosine(vecs[i], vecs[j]);
      if (sim > tau_cross)
        links.push_back({pool[i]->node_id, pool[j]->node_id,
                         EdgeType::kSameConcept, std::clamp(sim, 0.0, 1.0)});
    }
  }
  for (const auto& e : links) out.upsert_edge(e);
  return out;
}

}  // namespace graphplay
