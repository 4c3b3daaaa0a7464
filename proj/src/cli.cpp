#include "claraprint/cli.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "claraprint/corpus_store.h"
#include "claraprint/encoder.h"
#include "claraprint/eval.h"
#include "claraprint/search_index.h"

namespace claraprint {

namespace {

std::vector<int> parse_int_list(std::string_view text, std::string_view what) {
  std::vector<int> out;
  auto parse_one = [&](std::string_view token) {
    try {
      std::size_t used = 0;
      std::string s(token);
      int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("invalid {} '{}'", what, token));
    }
  };
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    auto dash = item.find('-', 1);
    if (dash == std::string_view::npos) {
      out.push_back(parse_one(item));
    } else {
      int lo = parse_one(item.substr(0, dash)), hi = parse_one(item.substr(dash + 1));
      if (lo > hi) throw ConfigError(fmt::format("descending {} range '{}'", what, item));
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
  }
  if (out.empty()) throw ConfigError(fmt::format("empty {} list", what));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    if (!item.empty()) out.emplace_back(item);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  return out;
}

/// Raw flag values; validated by the subcommand that uses them.
struct Flags {
  std::string duration;
  std::string widths = "2-7";
  double k1 = 1.2;
  double b = 0.75;
  std::string idf = "nonneg";
  std::uint64_t seed = 42;
  std::size_t top_k = 10;
  double confidence_min = 0.0;
  std::string sources;
  std::string n_refs;
  int repeats = 5;
  std::size_t min_samples = 30;
  std::string out;

  const CLI::App* active = nullptr;

  bool given(const std::string& name) const {
    const CLI::Option* opt = active == nullptr ? nullptr : active->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }
};

void add_encoder_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--duration", f.duration, "Truncation window(s) in seconds: 30, 120 or 30,120");
  cmd->add_option("--widths", f.widths, "Shingle widths, e.g. 2-7 or 2,4,6");
  cmd->add_option("--confidence-min", f.confidence_min, "Drop events with lower confidence");
}

void add_bm25_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--k1", f.k1, "BM25 term-frequency saturation");
  cmd->add_option("--b", f.b, "BM25 length normalization");
  cmd->add_option("--idf", f.idf, "IDF variant: nonneg or paper")->check(CLI::IsMember({"nonneg", "paper"}));
}

BM25Params bm25_from(const Flags& f, const BM25Params& base) {
  BM25Params p = base;
  if (f.given("--k1")) p.k1 = f.k1;
  if (f.given("--b")) p.b = f.b;
  if (f.given("--idf")) p.idf = *parse_idf_variant(f.idf);
  p.validate();
  return p;
}

/// Durations to use against `snapshot`; explicit flags must match what it holds.
std::vector<int> durations_for(const Flags& f, const CorpusSnapshot& snapshot) {
  if (f.given("--confidence-min") && f.confidence_min != snapshot.config.confidence_min) {
    throw ConfigError(fmt::format("snapshot was built with confidence_min {}, not {}; re-ingest instead",
                                  snapshot.config.confidence_min, f.confidence_min));
  }
  if (f.given("--widths") && WidthSet::parse(f.widths) != snapshot.config.widths) {
    throw ConfigError(fmt::format("snapshot was built with widths {}, not {}; re-ingest instead",
                                  snapshot.config.widths.to_string(), f.widths));
  }
  if (!f.given("--duration")) return snapshot.config.durations;
  auto wanted = parse_int_list(f.duration, "duration");
  for (int d : wanted) {
    const auto& have = snapshot.config.durations;
    if (std::find(have.begin(), have.end(), d) == have.end()) {
      throw ConfigError(fmt::format("snapshot holds durations {}, not {}; re-ingest instead",
                                    fmt::join(have, ","), d));
    }
  }
  return wanted;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path));
  return out;
}

int cmd_ingest(const std::string& input_dir, const std::string& snapshot_path, const Flags& f,
               std::ostream& out, std::ostream& err) {
  SnapshotConfig config;
  config.durations = parse_int_list(f.duration.empty() ? "120" : f.duration, "duration");
  config.confidence_min = f.confidence_min;
  config.widths = WidthSet::parse(f.widths);
  config.bm25 = bm25_from(f, BM25Params{});
  config.validate();

  AnnotationBatch batch = load_annotation_dir(input_dir);
  for (const auto& failure : batch.failures) fmt::print(err, "warning: skipped {}: {}\n", failure.path.string(), failure.message);
  if (batch.docs.empty()) {
    fmt::print(err, "error: no parseable annotation files in '{}'\n", input_dir);
    return 1;
  }

  Materialized m = materialize(batch.docs, config);
  for (const auto& w : m.report.warnings) fmt::print(err, "warning: {}\n", w);
  save_snapshot(m.snapshot, snapshot_path);
  fmt::print(out, "{} docs, {} cliques, {} degenerate fingerprints, {} warnings ({} files skipped)\n",
             m.snapshot.docs.size(), m.snapshot.cliques.size(), m.report.degenerate_doc_ids.size(),
             m.report.warnings.size() + batch.failures.size(), batch.failures.size());
  fmt::print(out, "wrote {}\n", snapshot_path);
  return 0;
}

int cmd_query(const std::string& snapshot_path, const std::string& annotation_path, const Flags& f,
              std::ostream& out, std::ostream& err) {
  if (f.top_k < 1) throw ConfigError("--top-k must be >= 1");
  const CorpusSnapshot snapshot = load_snapshot(snapshot_path);
  const auto durations = durations_for(f, snapshot);
  if (durations.size() != 1 && f.given("--duration")) throw ConfigError("query takes a single --duration");
  const int duration = durations.back();
  const BM25Params params = bm25_from(f, snapshot.config.bm25);

  const auto annotations = load_annotations(annotation_path);
  const AnnotationDoc& ann = annotations.front();
  const Fingerprint fp = fingerprint(ann, snapshot.config.encoder(duration));
  if (fp.degenerate) {
    fmt::print(err, "error: query too short: {} letters after cleaning (need at least {})\n",
               fp.print.letters.size(), kMinShingleWidth);
    return 1;
  }

  const Index index = Index::build(select_docs(snapshot, ann.source, duration), params);
  const auto hits = index.search(multi_shingle(fp.print.letters, snapshot.config.widths), f.top_k);
  if (hits.empty()) {
    fmt::print(out, "no matches\n");
    return 0;
  }
  fmt::print(out, "rank\twork_id\trecording_id\tscore\n");
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const DocRecord* d = index.find(hits[i].doc_id);
    fmt::print(out, "{}\t{}\t{}\t{:.6f}\n", i + 1, d->work_id, d->meta.recording_id, hits[i].score);
  }
  return 0;
}

int cmd_evaluate(const std::string& snapshot_path, const Flags& f, std::ostream& out) {
  CorpusSnapshot snapshot = load_snapshot(snapshot_path);
  const auto durations = durations_for(f, snapshot);
  snapshot.config.bm25 = bm25_from(f, snapshot.config.bm25);
  if (f.repeats < 1) throw ConfigError("--repeats must be >= 1");

  std::vector<SourceCombo> combos;
  if (!f.sources.empty()) {
    for (const auto& item : split_list(f.sources)) combos.push_back(SourceCombo::parse(item));
  }
  std::vector<std::size_t> n_refs;
  if (!f.n_refs.empty()) {
    for (int n : parse_int_list(f.n_refs, "n-refs")) {
      if (n < 1 || n > 4) throw ConfigError(fmt::format("--n-refs values must be in 1..4, got {}", n));
      n_refs.push_back(static_cast<std::size_t>(n));
    }
  }

  std::vector<RetrievalRow> rows;
  for (int duration : durations) {
    std::vector<SourceCombo> run = combos;
    if (run.empty()) {
      std::set<SourceAlgo> present;
      for (const auto& d : snapshot.docs) {
        if (d.meta.duration_s == duration && d.meta.sources.size() == 1) present.insert(d.meta.sources[0]);
      }
      for (SourceAlgo s : present) run.emplace_back(std::vector<SourceAlgo>{s});
    }
    for (const auto& r : run_combination_study(snapshot, run, duration, f.seed, f.repeats)) {
      rows.push_back({"retrieval", r.combo.label(), duration, 0, r.metrics});
    }
    for (std::size_t n : n_refs) {
      for (const auto& combo : run) {
        const auto docs = combine_sources(snapshot, combo, duration);
        rows.push_back({"multi_ref", combo.label(), duration, n,
                        run_multi_recording_study(docs, n, snapshot.config.bm25, f.seed, f.repeats)});
      }
    }
  }

  const std::string path = f.out.empty() ? "retrieval.csv" : f.out;
  auto csv = open_output(path);
  write_retrieval_csv(csv, rows);
  print_retrieval_table(out, rows);
  fmt::print(out, "wrote {}\n", path);
  return 0;
}

int cmd_pairwise(const std::string& snapshot_path, const Flags& f, std::ostream& out) {
  const CorpusSnapshot snapshot = load_snapshot(snapshot_path);
  const auto durations = durations_for(f, snapshot);
  auto rows = run_pairwise(snapshot);
  std::erase_if(rows, [&](const PairwiseStats& r) {
    return std::find(durations.begin(), durations.end(), r.duration_s) == durations.end();
  });
  const std::string path = f.out.empty() ? "pairwise.csv" : f.out;
  auto csv = open_output(path);
  write_pairwise_csv(csv, rows);
  print_pairwise_table(out, rows);
  fmt::print(out, "wrote {}\n", path);
  return 0;
}

int cmd_bench(const std::string& snapshot_path, const Flags& f, std::ostream& out) {
  CorpusSnapshot snapshot = load_snapshot(snapshot_path);
  const auto durations = durations_for(f, snapshot);
  snapshot.config.bm25 = bm25_from(f, snapshot.config.bm25);
  if (snapshot.docs.empty()) throw ConfigError("snapshot has no documents to benchmark");
  std::erase_if(snapshot.docs, [&](const DocRecord& d) {
    return std::find(durations.begin(), durations.end(), d.meta.duration_s) == durations.end();
  });
  const auto rows = run_bench(snapshot, f.min_samples);
  const std::string path = f.out.empty() ? "bench.csv" : f.out;
  auto csv = open_output(path);
  write_bench_csv(csv, rows);
  print_bench_table(out, rows);
  fmt::print(out, "wrote {}\n", path);
  return 0;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chord and melody fingerprints for classical-music cover retrieval", "claraprint"};
  app.require_subcommand(1);
  Flags f;
  std::string input_dir, snapshot_path, annotation_path;

  auto* ingest = app.add_subcommand("ingest", "Fingerprint a directory of annotation files into a snapshot");
  ingest->add_option("input_dir", input_dir, "Directory of *.json annotation files")->required();
  ingest->add_option("snapshot", snapshot_path, "Snapshot file to write")->required();
  add_encoder_flags(ingest, f);
  add_bm25_flags(ingest, f);

  auto* query = app.add_subcommand("query", "Rank indexed recordings against one annotation file");
  query->add_option("snapshot", snapshot_path, "Snapshot file")->required();
  query->add_option("annotation", annotation_path, "Annotation file of the unknown recording")->required();
  query->add_option("--top-k", f.top_k, "Number of results")->check(CLI::PositiveNumber);
  add_encoder_flags(query, f);
  add_bm25_flags(query, f);

  auto* evaluate = app.add_subcommand("evaluate", "MT@10 / MT@1 retrieval protocol and reference studies");
  evaluate->add_option("snapshot", snapshot_path, "Snapshot file")->required();
  evaluate->add_option("--sources", f.sources, "Comma list of sources or combos, e.g. ch,me,ch+cr");
  evaluate->add_option("--n-refs", f.n_refs, "Reference recordings per clique, e.g. 1-4");
  evaluate->add_option("--seed", f.seed, "Master random seed");
  evaluate->add_option("--repeats", f.repeats, "Protocol repeats")->check(CLI::PositiveNumber);
  evaluate->add_option("--out", f.out, "CSV output path (default retrieval.csv)");
  add_encoder_flags(evaluate, f);
  add_bm25_flags(evaluate, f);

  auto* pairwise = app.add_subcommand("pairwise", "Within-clique Levenshtein and common-word statistics");
  pairwise->add_option("snapshot", snapshot_path, "Snapshot file")->required();
  pairwise->add_option("--out", f.out, "CSV output path (default pairwise.csv)");
  add_encoder_flags(pairwise, f);

  auto* bench = app.add_subcommand("bench", "Mean ingestion and query times per source");
  bench->add_option("snapshot", snapshot_path, "Snapshot file")->required();
  bench->add_option("--min-samples", f.min_samples, "Minimum timed samples per group")->check(CLI::PositiveNumber);
  bench->add_option("--out", f.out, "CSV output path (default bench.csv)");
  add_encoder_flags(bench, f);
  add_bm25_flags(bench, f);

  std::vector<std::string> argv_store;
  argv_store.emplace_back("claraprint");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (const auto* sub : app.get_subcommands()) f.active = sub;

  try {
    if (f.confidence_min < 0.0) throw ConfigError("--confidence-min must be >= 0");
    if (*ingest) return cmd_ingest(input_dir, snapshot_path, f, out, err);
    if (*query) return cmd_query(snapshot_path, annotation_path, f, out, err);
    if (*evaluate) return cmd_evaluate(snapshot_path, f, out);
    if (*pairwise) return cmd_pairwise(snapshot_path, f, out);
    if (*bench) return cmd_bench(snapshot_path, f, out);
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace claraprint
