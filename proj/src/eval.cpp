#include "claraprint/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace claraprint {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double lev_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::size_t common_words(const TermBag& a, const TermBag& b) {
  // Both maps are sorted; walk them together.
  std::size_t n = 0;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

double jaccard(const TermBag& a, const TermBag& b) {
  const std::size_t inter = common_words(a, b);
  const std::size_t uni = a.distinct() + b.distinct() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  std::uint64_t z = parent + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("draw_below(0)");
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

namespace {

// Runs fn(i) for i in [0, n) on a few threads. fn must only write to slot i.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    }));
  }
  for (auto& t : tasks) t.get();
}

struct CliqueGroup {
  std::string work_id;
  std::vector<std::uint32_t> members;  // ordinals into the doc list, doc_id order
};

template <typename Docs>
std::vector<CliqueGroup> group_by_work(const Docs& docs) {
  std::vector<std::uint32_t> order(docs.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (docs[a].work_id != docs[b].work_id) return docs[a].work_id < docs[b].work_id;
    return docs[a].doc_id < docs[b].doc_id;
  });
  std::vector<CliqueGroup> groups;
  for (std::uint32_t i : order) {
    if (groups.empty() || groups.back().work_id != docs[i].work_id) groups.push_back({docs[i].work_id, {}});
    groups.back().members.push_back(i);
  }
  return groups;
}

void require_clique_size(const std::vector<CliqueGroup>& groups, std::size_t min_size, std::string_view why) {
  std::vector<std::string> bad;
  for (const auto& g : groups) {
    if (g.members.size() < min_size) bad.push_back(fmt::format("{} ({})", g.work_id, g.members.size()));
  }
  if (!bad.empty()) {
    throw ProtocolError(fmt::format("{}; offending cliques: {}", why, fmt::join(bad, ", ")));
  }
}

struct Tally {
  std::size_t in_top10 = 0;
  std::size_t first_hits = 0;
  std::size_t queries = 0;
};

RetrievalMetrics to_metrics(const std::vector<Tally>& tallies) {
  Tally total;
  for (const auto& t : tallies) {
    total.in_top10 += t.in_top10;
    total.first_hits += t.first_hits;
    total.queries += t.queries;
  }
  RetrievalMetrics m;
  m.repeats = 1;
  m.queries = total.queries;
  if (total.queries > 0) {
    m.mt10 = static_cast<double>(total.in_top10) / static_cast<double>(total.queries);
    m.mt1 = static_cast<double>(total.first_hits) / static_cast<double>(total.queries);
  }
  return m;
}

void tally_hits(Tally& t, const Index& index, const std::vector<SearchHit>& hits, std::string_view work_id) {
  ++t.queries;
  for (std::size_t rank = 0; rank < hits.size() && rank < kMetricsDepth; ++rank) {
    const DocRecord* d = index.find(hits[rank].doc_id);
    if (d != nullptr && d->work_id == work_id) {
      ++t.in_top10;
      if (rank == 0) ++t.first_hits;
    }
  }
}

RetrievalMetrics average(std::span<const RetrievalMetrics> runs) {
  RetrievalMetrics m;
  for (const auto& r : runs) {
    m.mt10 += r.mt10;
    m.mt1 += r.mt1;
    m.queries += r.queries;
  }
  m.repeats = static_cast<int>(runs.size());
  if (!runs.empty()) {
    m.mt10 /= static_cast<double>(runs.size());
    m.mt1 /= static_cast<double>(runs.size());
  }
  return m;
}

void check_repeats(int repeats) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
}

}  // namespace

RetrievalMetrics run_protocol_repeat(const Index& index, std::uint64_t repeat_seed) {
  const auto& docs = index.docs();
  const auto groups = group_by_work(docs);
  require_clique_size(groups, 2, "every clique needs at least 2 recordings");

  std::vector<Tally> tallies(groups.size());
  parallel_for(groups.size(), [&](std::size_t c) {
    const auto& g = groups[c];
    std::mt19937_64 rng(derive_seed(repeat_seed, c));
    const std::size_t pick = draw_below(rng, g.members.size());
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      if (i == pick) continue;
      const DocRecord& q = docs[g.members[i]];
      const std::string self[] = {q.doc_id};
      tally_hits(tallies[c], index, index.search(q.bag, kMetricsDepth, self), g.work_id);
    }
  });
  return to_metrics(tallies);
}

RetrievalMetrics run_retrieval_protocol(const Index& index, std::uint64_t seed, int repeats) {
  check_repeats(repeats);
  std::vector<RetrievalMetrics> runs;
  for (int r = 0; r < repeats; ++r) {
    runs.push_back(run_protocol_repeat(index, derive_seed(seed, static_cast<std::uint64_t>(r))));
  }
  return average(runs);
}

SourceCombo::SourceCombo(std::vector<SourceAlgo> sources) : sources_(std::move(sources)) {
  if (sources_.empty()) throw ConfigError("source combination is empty");
  std::sort(sources_.begin(), sources_.end());
  sources_.erase(std::unique(sources_.begin(), sources_.end()), sources_.end());
}

SourceCombo SourceCombo::parse(std::string_view text) {
  std::vector<SourceAlgo> sources;
  while (true) {
    auto plus = text.find('+');
    auto tag = text.substr(0, plus);
    auto src = parse_source(tag);
    if (!src) throw ConfigError(fmt::format("unknown source '{}' (expected ch, cr, me or mp)", tag));
    sources.push_back(*src);
    if (plus == std::string_view::npos) break;
    text = text.substr(plus + 1);
  }
  return SourceCombo(std::move(sources));
}

std::string SourceCombo::label() const {
  std::string out;
  for (SourceAlgo s : sources_) {
    if (!out.empty()) out += '+';
    out += to_string(s);
  }
  return out;
}

std::vector<DocRecord> select_docs(const CorpusSnapshot& snapshot, SourceAlgo source, int duration_s) {
  std::vector<DocRecord> out;
  for (const auto& d : snapshot.docs) {
    if (d.meta.duration_s == duration_s && d.meta.sources.size() == 1 && d.meta.sources[0] == source) {
      out.push_back(d);
    }
  }
  return out;
}

std::vector<DocRecord> combine_sources(const CorpusSnapshot& snapshot, const SourceCombo& combo,
                                       int duration_s) {
  // recording -> source -> doc
  std::map<std::string, std::map<SourceAlgo, const DocRecord*>> by_recording;
  for (const auto& d : snapshot.docs) {
    if (d.meta.duration_s != duration_s || d.meta.sources.size() != 1) continue;
    by_recording[d.meta.recording_id][d.meta.sources[0]] = &d;
  }

  std::vector<std::string> missing;
  std::vector<DocRecord> out;
  const std::string label = combo.label();
  for (const auto& [recording_id, sources] : by_recording) {
    DocRecord rec;
    rec.doc_id = fmt::format("{}:{}:{}", recording_id, label, duration_s);
    rec.meta.recording_id = recording_id;
    rec.meta.sources = combo.sources();
    rec.meta.duration_s = duration_s;
    for (SourceAlgo s : combo.sources()) {
      auto it = sources.find(s);
      if (it == sources.end()) {
        missing.push_back(fmt::format("{}:{}", recording_id, to_string(s)));
        continue;
      }
      rec.work_id = it->second->work_id;
      // Each doc bag is the multi-shingle of one print, so the sum is combine().
      rec.bag.merge(it->second->bag);
    }
    out.push_back(std::move(rec));
  }
  if (!missing.empty()) {
    throw MissingSource(fmt::format("combination {} at {} s lacks: {}", label, duration_s, fmt::join(missing, ", ")));
  }
  return out;
}

std::vector<ComboResult> run_combination_study(const CorpusSnapshot& snapshot,
                                               std::span<const SourceCombo> combos, int duration_s,
                                               std::uint64_t seed, int repeats) {
  std::vector<ComboResult> results;
  for (const auto& combo : combos) {
    Index index = Index::build(combine_sources(snapshot, combo, duration_s), snapshot.config.bm25);
    results.push_back({combo, duration_s, run_retrieval_protocol(index, seed, repeats)});
  }
  return results;
}

RetrievalMetrics run_multi_recording_study(std::span<const DocRecord> docs, std::size_t n_refs,
                                           const BM25Params& params, std::uint64_t seed, int repeats) {
  check_repeats(repeats);
  if (n_refs < 1) throw ConfigError("n_refs must be >= 1");
  const auto groups = group_by_work(docs);
  require_clique_size(groups, n_refs + 1,
                      fmt::format("every clique needs more than n_refs = {} recordings", n_refs));

  std::vector<RetrievalMetrics> runs;
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t repeat_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    Index::Builder builder(params);
    std::vector<std::vector<std::uint32_t>> queries(groups.size());
    for (std::size_t c = 0; c < groups.size(); ++c) {
      std::vector<std::uint32_t> members = groups[c].members;
      std::mt19937_64 rng(derive_seed(repeat_seed, c));
      for (std::size_t i = 0; i < n_refs; ++i) {
        std::swap(members[i], members[i + draw_below(rng, members.size() - i)]);
      }
      DocRecord ref;
      ref.doc_id = groups[c].work_id;
      ref.work_id = groups[c].work_id;
      for (std::size_t i = 0; i < n_refs; ++i) {
        const DocRecord& d = docs[members[i]];
        ref.bag.merge(d.bag);
        for (SourceAlgo s : d.meta.sources) {
          if (std::find(ref.meta.sources.begin(), ref.meta.sources.end(), s) == ref.meta.sources.end()) {
            ref.meta.sources.push_back(s);
          }
        }
        ref.meta.duration_s = d.meta.duration_s;
      }
      builder.add(std::move(ref));
      queries[c].assign(members.begin() + static_cast<std::ptrdiff_t>(n_refs), members.end());
    }
    const Index index = std::move(builder).build();

    std::vector<Tally> tallies(groups.size());
    parallel_for(groups.size(), [&](std::size_t c) {
      for (std::uint32_t q : queries[c]) {
        tally_hits(tallies[c], index, index.search(docs[q].bag, kMetricsDepth), groups[c].work_id);
      }
    });
    runs.push_back(to_metrics(tallies));
  }
  return average(runs);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  // Guard the min <= mean <= max law against rounding.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

namespace {

std::vector<std::pair<int, SourceAlgo>> configurations(const CorpusSnapshot& snapshot) {
  std::set<std::pair<int, SourceAlgo>> found;
  for (const auto& d : snapshot.docs) {
    if (d.meta.sources.size() == 1) found.emplace(d.meta.duration_s, d.meta.sources[0]);
  }
  return {found.begin(), found.end()};
}

}  // namespace

std::vector<PairwiseStats> run_pairwise(const CorpusSnapshot& snapshot) {
  std::vector<PairwiseStats> out;
  for (auto [duration, source] : configurations(snapshot)) {
    const auto docs = select_docs(snapshot, source, duration);
    std::vector<double> lev, common, jac;
    for (const auto& g : group_by_work(docs)) {
      for (std::size_t i = 0; i < g.members.size(); ++i) {
        for (std::size_t j = i + 1; j < g.members.size(); ++j) {
          const DocRecord& a = docs[g.members[i]];
          const DocRecord& b = docs[g.members[j]];
          lev.push_back(lev_similarity(a.meta.letters, b.meta.letters));
          common.push_back(static_cast<double>(common_words(a.bag, b.bag)));
          jac.push_back(jaccard(a.bag, b.bag));
        }
      }
    }
    out.push_back({source, duration, summarize(lev), summarize(common), summarize(jac)});
  }
  return out;
}

std::vector<TimingReport> run_bench(const CorpusSnapshot& snapshot, std::size_t min_samples) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  std::vector<TimingReport> out;
  for (auto [duration, source] : configurations(snapshot)) {
    const auto docs = select_docs(snapshot, source, duration);
    const std::size_t n = docs.size();
    const std::size_t passes = std::max<std::size_t>(3, (min_samples + n - 1) / n);
    std::vector<double> ingest, query;

    // Pass 0 warms caches and the allocator and is not recorded.
    for (std::size_t pass = 0; pass <= passes; ++pass) {
      const bool record = pass > 0;
      std::vector<double> pass_ingest;
      Index::Builder builder(snapshot.config.bm25);
      for (const auto& d : docs) {
        auto t0 = clock::now();
        DocRecord rec{d.doc_id, d.work_id, multi_shingle(d.meta.letters, snapshot.config.widths), d.meta};
        builder.add(std::move(rec));
        pass_ingest.push_back(ms_since(t0));
      }
      auto t0 = clock::now();
      const Index index = std::move(builder).build();
      const double finalize_share = ms_since(t0) / static_cast<double>(n);
      for (double& v : pass_ingest) v += finalize_share;

      for (const auto& d : docs) {
        const std::string self[] = {d.doc_id};
        auto q0 = clock::now();
        auto hits = index.search(d.bag, kMetricsDepth, self);
        const double elapsed = ms_since(q0);
        if (record) query.push_back(elapsed);
      }
      if (record) ingest.insert(ingest.end(), pass_ingest.begin(), pass_ingest.end());
    }
    out.push_back({source, duration, n, ingest.size(), summarize(ingest), summarize(query)});
  }
  return out;
}

// --- reports -----------------------------------------------------------------

void write_retrieval_csv(std::ostream& out, std::span<const RetrievalRow> rows) {
  out << "study,sources,duration_s,n_refs,queries,mt10,mt1\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{:.6f},{:.6f}\n", r.study, r.sources, r.duration_s, r.n_refs,
               r.metrics.queries, r.metrics.mt10, r.metrics.mt1);
  }
}

void write_pairwise_csv(std::ostream& out, std::span<const PairwiseStats> rows) {
  out << "source,duration_s,metric,pairs,mean,min,max,stddev\n";
  for (const auto& r : rows) {
    auto row = [&](std::string_view metric, const Summary& s) {
      fmt::print(out, "{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", to_string(r.source), r.duration_s, metric,
                 s.count, s.mean, s.min, s.max, s.stddev);
    };
    row("levenshtein_similarity", r.lev_similarity);
    row("common_words", r.common_words);
    row("jaccard", r.jaccard);
  }
}

void write_bench_csv(std::ostream& out, std::span<const TimingReport> rows) {
  out << "source,duration_s,docs,samples,ingest_mean_ms,ingest_stddev_ms,query_mean_ms,query_stddev_ms\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", to_string(r.source), r.duration_s, r.docs,
               r.samples, r.ingest_ms.mean, r.ingest_ms.stddev, r.query_ms.mean, r.query_ms.stddev);
  }
}

void print_retrieval_table(std::ostream& out, std::span<const RetrievalRow> rows) {
  fmt::print(out, "{:<10} {:<12} {:>8} {:>6} {:>8} {:>8} {:>8}\n", "study", "sources", "duration", "n_refs",
             "queries", "MT@10", "MT@1");
  for (const auto& r : rows) {
    fmt::print(out, "{:<10} {:<12} {:>8} {:>6} {:>8} {:>8.3f} {:>8.3f}\n", r.study, r.sources, r.duration_s,
               r.n_refs, r.metrics.queries, r.metrics.mt10, r.metrics.mt1);
  }
}

void print_pairwise_table(std::ostream& out, std::span<const PairwiseStats> rows) {
  fmt::print(out, "{:<6} {:>8} {:>7} {:>10} {:>10} {:>12} {:>12}\n", "source", "duration", "pairs", "lev avg",
             "lev std", "common avg", "common std");
  for (const auto& r : rows) {
    fmt::print(out, "{:<6} {:>8} {:>7} {:>10.3f} {:>10.3f} {:>12.2f} {:>12.2f}\n", to_string(r.source),
               r.duration_s, r.lev_similarity.count, r.lev_similarity.mean, r.lev_similarity.stddev,
               r.common_words.mean, r.common_words.stddev);
  }
}

void print_bench_table(std::ostream& out, std::span<const TimingReport> rows) {
  fmt::print(out, "{:<6} {:>8} {:>6} {:>8} {:>14} {:>14}\n", "source", "duration", "docs", "samples",
             "ingest ms", "query ms");
  for (const auto& r : rows) {
    fmt::print(out, "{:<6} {:>8} {:>6} {:>8} {:>14.4f} {:>14.4f}\n", to_string(r.source), r.duration_s, r.docs,
               r.samples, r.ingest_ms.mean, r.query_ms.mean);
  }
}

}  // namespace claraprint
