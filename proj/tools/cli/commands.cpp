#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "graphplay/corpus_ir.hpp"
#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"

namespace graphplay::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

std::string epoch_dir(int e) {
  std::ostringstream s;
  s << "epoch_" << std::setw(3) << std::setfill('0') << e;
  return s.str();
}

}  // namespace

BuildKgResult cmd_build_kg(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  if (cfg.corpus.empty()) throw SchemaError("corpus", "no documents given");
  fs::create_directories(out);
  write_fingerprint(cfg, out, "build-kg");

  auto embedder = make_run_embedder(cfg);
  auto classifier = make_classifier(cfg);
  BuildKgResult result;
  for (const auto& path : cfg.corpus) {
    try {
      const DocumentIR doc = load_document(path);
      ConstructionReport report;
      KnowledgeGraph g = build_document_graph(doc, *embedder, *classifier,
                                              cfg.construct, report);
      const fs::path dir = out / doc.doc_id;
      save_snapshot(g, dir);
      write_text(dir / "report.json", report.to_json().dump(2) + "\n");
      result.snapshots.push_back(dir);
    } catch (const EndpointError&) {
      throw;
    } catch (const ProtocolError&) {
      throw;
    } catch (const Error& e) {
      result.failures.push_back(path.string() + ": " + e.what());
    }
  }
  return result;
}

fs::path cmd_federate(const RunConfig& cfg, std::span<const fs::path> inputs,
                      const fs::path& out) {
  cfg.validate();
  if (inputs.empty()) throw SchemaError("inputs", "no snapshots given");
  std::vector<KnowledgeGraph> graphs;
  for (const auto& dir : inputs) graphs.push_back(load_snapshot(dir));
  auto embedder = make_run_embedder(cfg);
  KnowledgeGraph merged = federate(graphs, *embedder, cfg.construct.tau_cross);
  save_snapshot(merged, out);
  write_fingerprint(cfg, out, "federate");
  return out;
}

SelfPlaySummary cmd_selfplay(const RunConfig& cfg, const fs::path& snapshot,
                             const fs::path& out) {
  cfg.validate();
  KnowledgeGraph g = load_snapshot(snapshot);
  fs::create_directories(out);
  write_fingerprint(cfg, out, "selfplay-run");
  const fs::path audit = out / "refine_audit.jsonl";
  write_text(audit, "");

  auto model = make_generation_model(cfg);
  auto classifier = make_classifier(cfg);
  auto embedder = make_run_embedder(cfg);
  TrainerMetadata meta = cfg.trainer;
  meta.config_hash = cfg.fingerprint();

  SelfPlaySummary summary;
  CurriculumState cur = CurriculumState::initial(cfg.schedule);
  std::set<EdgeKey> quarantined;
  SelfPlayConfig sp = cfg.selfplay;
  for (int e = 0; e < cfg.epochs; ++e) {
    const RewardWeights w = anneal_weights(cfg.anneal, e);
    sp.excluded_edges = cfg.quarantine_new_edges ? &quarantined : nullptr;
    const std::uint64_t epoch_seed = mix64(cfg.seed + static_cast<std::uint64_t>(e));
    EpochResult r = run_epoch(g, cur, sp, w, *model, epoch_seed);

    const fs::path dir = out / epoch_dir(e);
    fs::create_directories(dir);
    write_text(dir / "stats.json", to_json(r.stats).dump(2) + "\n");
    summary.preferences_written +=
        export_preferences(r.episodes, dir / "preferences.jsonl", meta);

    json trace = {{"epoch", e},
                  {"max_hops", cur.max_hops},
                  {"difficulty", std::string(to_string(cur.difficulty))},
                  {"weights", {w.w_a, w.w_p, w.w_c}},
                  {"kept", r.stats.kept}};

    if (cfg.refine_enabled) {
      RefinementBatch batch = build_refinement(
          r.episodes, g, cfg.refine, classifier.get(),
          cfg.merge_nodes ? embedder.get() : nullptr, e);
      append_audit_log(audit, batch);
      g = apply_batch(g, batch);
      quarantined.clear();
      for (const auto& added : batch.added) quarantined.insert(added.key());
      trace["refinement"] = {{"added", batch.added.size()},
                             {"penalized", batch.penalized.size()},
                             {"removed", batch.removed.size()},
                             {"merged", batch.merged.size()}};
    }
    summary.curriculum.push_back(trace);
    cur = advance_curriculum(cur, r.stats.per_type_accuracy, cfg.schedule);
    ++summary.epochs_run;
    std::cerr << "epoch " << e << ": " << r.stats.ok << " ok, " << r.stats.kept
              << " kept, " << r.stats.skipped << " skipped, " << r.stats.failed
              << " failed\n";
  }
  write_text(out / "curriculum.json", summary.curriculum.dump(2) + "\n");
  save_snapshot(g, out / "final_kg");
  return summary;
}

MetricsReport cmd_evaluate(const RunConfig& cfg, const fs::path& snapshot,
                           const fs::path& dataset, const fs::path& out) {
  cfg.validate();
  DatasetLoad data = load_dataset(dataset);
  if (!data.errors.empty()) {
    std::string msg;
    for (const auto& e : data.errors) msg += "\n  " + e;
    throw SchemaError(dataset.filename().string(),
                      std::to_string(data.errors.size()) + " invalid item(s):" + msg);
  }
  KnowledgeGraph g = load_snapshot(snapshot);
  auto model = make_generation_model(cfg);
  // The offline stub answers from the dataset's own gold answers.
  if (auto* stub = dynamic_cast<ScriptedModel*>(model.get()))
    for (const auto& item : data.items) stub->register_answer(item.question, item.gold_answer);

  EvalOptions opts;
  opts.epsilon = cfg.selfplay.epsilon;
  opts.tau = cfg.selfplay.tau_num;
  opts.generation.max_tokens = cfg.selfplay.generation.max_tokens;
  MetricsReport report = evaluate_dataset(data.items, *model, g, opts);

  fs::create_directories(out);
  write_fingerprint(cfg, out, "evaluate");
  write_text(out / "report.json", to_json(report).dump(2) + "\n");
  write_text(out / "report.txt", to_table(report));
  return report;
}

std::size_t cmd_export_prefs(const fs::path& run_dir, const fs::path& out_file) {
  if (!fs::is_directory(run_dir)) throw NotFoundError("run directory not found: " +
                                                      run_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const fs::path p = entry.path() / "preferences.jsonl";
    if (entry.is_directory() && fs::exists(p)) files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  std::ostringstream all;
  std::size_t n = 0;
  for (const auto& f : files) {
    for (const auto& rec : load_preferences(f)) {
      all << to_json(rec).dump() << "\n";
      ++n;
    }
  }
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  write_text(out_file, all.str());
  return n;
}

std::size_t cmd_gen_dataset(const RunConfig& cfg, const fs::path& snapshot, int per_hop,
                            const fs::path& out_file) {
  cfg.validate();
  if (per_hop < 1) throw ConfigError("--per-hop must be >= 1");
  KnowledgeGraph g = load_snapshot(snapshot);
  auto model = make_generation_model(cfg);
  auto items = generate_dataset(g, *model, per_hop, cfg.seed, cfg.selfplay.templates);
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  write_dataset(out_file, items);
  return items.size();
}

}  // namespace graphplay::cli
