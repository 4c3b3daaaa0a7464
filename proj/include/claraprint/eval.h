#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claraprint/corpus_store.h"
#include "claraprint/search_index.h"
#include "claraprint/shingler.h"

namespace claraprint {

// --- string and bag similarity -----------------------------------------------

/// Minimum number of single-character insertions, deletions and substitutions.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - levenshtein / max(|a|, |b|); 1.0 when both are empty.
double lev_similarity(std::string_view a, std::string_view b);

/// Number of distinct terms present in both bags.
std::size_t common_words(const TermBag& a, const TermBag& b);

/// |A n B| / |A u B| over distinct terms; 1.0 when both are empty.
double jaccard(const TermBag& a, const TermBag& b);

// --- seeding -----------------------------------------------------------------

/// Child seed for stream `index` of `parent` (SplitMix64 finalizer), so every
/// repeat and clique gets its own generator independent of execution order.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// Unbiased draw in [0, n) from the raw 64-bit output of the engine.
std::size_t draw_below(std::mt19937_64& rng, std::size_t n);

// --- retrieval protocols -----------------------------------------------------

inline constexpr std::size_t kMetricsDepth = 10;

struct RetrievalMetrics {
  /// Mean number of same-clique documents among the top 10.
  double mt10 = 0.0;
  /// Fraction of queries whose first result is from the same clique.
  double mt1 = 0.0;
  /// Queries issued per repeat (summed over repeats for multi-repeat runs).
  std::size_t queries = 0;
  int repeats = 0;

  bool operator==(const RetrievalMetrics&) const = default;
};

/// One repeat of the clique protocol: in every clique one recording is drawn
/// as the held-out pick and each other recording queries the full index with
/// its own document excluded. Cliques are the index documents grouped by work_id.
/// Throws ProtocolError (naming the cliques) when a clique has fewer than 2 docs.
RetrievalMetrics run_protocol_repeat(const Index& index, std::uint64_t repeat_seed);

/// Mean of `repeats` protocol repeats seeded with derive_seed(seed, r).
RetrievalMetrics run_retrieval_protocol(const Index& index, std::uint64_t seed, int repeats = 5);

/// Non-empty, sorted, duplicate-free set of source algorithms.
class SourceCombo {
 public:
  explicit SourceCombo(std::vector<SourceAlgo> sources);
  /// "ch", "ch+me", ... ; throws ConfigError on unknown tags.
  static SourceCombo parse(std::string_view text);

  const std::vector<SourceAlgo>& sources() const { return sources_; }
  std::string label() const;
  bool operator==(const SourceCombo&) const = default;

 private:
  std::vector<SourceAlgo> sources_;
};

/// Single-source documents of one configuration, in doc_id order.
std::vector<DocRecord> select_docs(const CorpusSnapshot& snapshot, SourceAlgo source, int duration_s);

/// One combined document per recording: the bags of the combo's sources summed.
/// Throws MissingSource when a recording lacks one of the sources.
std::vector<DocRecord> combine_sources(const CorpusSnapshot& snapshot, const SourceCombo& combo,
                                       int duration_s);

struct ComboResult {
  SourceCombo combo;
  int duration_s = 120;
  RetrievalMetrics metrics;
};

std::vector<ComboResult> run_combination_study(const CorpusSnapshot& snapshot,
                                               std::span<const SourceCombo> combos, int duration_s,
                                               std::uint64_t seed, int repeats = 5);

/// Per clique, n_refs drawn recordings are summed into one reference document;
/// the remaining recordings query the index of references.
/// Throws ProtocolError when a clique has n_refs or fewer documents.
RetrievalMetrics run_multi_recording_study(std::span<const DocRecord> docs, std::size_t n_refs,
                                           const BM25Params& params, std::uint64_t seed,
                                           int repeats = 5);

// --- pairwise statistics -----------------------------------------------------

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// Population standard deviation.
  double stddev = 0.0;
};

Summary summarize(std::span<const double> values);

struct PairwiseStats {
  SourceAlgo source = SourceAlgo::ch;
  int duration_s = 120;
  Summary lev_similarity;
  Summary common_words;
  Summary jaccard;
};

/// Within-clique pair statistics for every (duration, source) in the snapshot.
std::vector<PairwiseStats> run_pairwise(const CorpusSnapshot& snapshot);

// --- timing ------------------------------------------------------------------

struct TimingReport {
  SourceAlgo source = SourceAlgo::ch;
  int duration_s = 120;
  std::size_t docs = 0;
  std::size_t samples = 0;
  Summary ingest_ms;
  Summary query_ms;
};

/// Wall-clock ingestion (shingle + index insert) and query timings per
/// (duration, source). A warm-up pass is discarded; passes repeat until every
/// group has at least `min_samples` samples. Single-threaded.
std::vector<TimingReport> run_bench(const CorpusSnapshot& snapshot, std::size_t min_samples = 30);

// --- reports -----------------------------------------------------------------

struct RetrievalRow {
  std::string study;  // "retrieval" or "multi_ref"
  std::string sources;
  int duration_s = 120;
  std::size_t n_refs = 0;
  RetrievalMetrics metrics;
};

void write_retrieval_csv(std::ostream& out, std::span<const RetrievalRow> rows);
void write_pairwise_csv(std::ostream& out, std::span<const PairwiseStats> rows);
void write_bench_csv(std::ostream& out, std::span<const TimingReport> rows);

void print_retrieval_table(std::ostream& out, std::span<const RetrievalRow> rows);
void print_pairwise_table(std::ostream& out, std::span<const PairwiseStats> rows);
void print_bench_table(std::ostream& out, std::span<const TimingReport> rows);

}  // namespace claraprint
