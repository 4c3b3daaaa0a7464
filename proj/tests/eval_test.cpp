#include "claraprint/eval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "claraprint/errors.h"
#include "claraprint/synthetic.h"
#include "support/oracles.h"
#include "support/synthetic_corpus.h"

namespace claraprint {
namespace {

using testsupport::docs_from;
using testsupport::identical_cliques;
using testsupport::snapshot_from;

TermBag bag(std::initializer_list<std::pair<const char*, std::uint32_t>> terms) {
  TermBag b;
  for (const auto& [t, n] : terms) b.add(t, n);
  return b;
}

TEST(LevenshteinTest, Examples) {
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("abfh", "abfh"), 0u);
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", ""), 0u);
}

TEST(LevSimilarityTest, Examples) {
  EXPECT_DOUBLE_EQ(lev_similarity("abfh", "abfh"), 1.0);
  EXPECT_DOUBLE_EQ(lev_similarity("ab", "cd"), 0.0);
  EXPECT_DOUBLE_EQ(lev_similarity("abfh", "abfq"), 0.75);
  EXPECT_DOUBLE_EQ(lev_similarity("", ""), 1.0);
}

TEST(CommonWordsTest, Examples) {
  TermBag b7;
  for (const char* t : {"ab", "bc", "cd", "de", "ef", "abc", "bcd"}) b7.add(t);
  EXPECT_EQ(common_words(b7, b7), 7u);
  EXPECT_EQ(common_words(bag({{"ab", 1}}), bag({{"cd", 1}})), 0u);
  EXPECT_EQ(common_words(bag({{"ab", 3}, {"bc", 1}}), bag({{"ab", 1}, {"cd", 9}})), 1u);
}

TEST(JaccardTest, Examples) {
  EXPECT_DOUBLE_EQ(jaccard(TermBag{}, TermBag{}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(bag({{"ab", 3}, {"bc", 1}}), bag({{"ab", 1}, {"cd", 9}})), 1.0 / 3.0);
}

std::string random_string(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
  std::string s(rng() % (max_len + 1), 'a');
  for (char& c : s) c = static_cast<char>('a' + rng() % alphabet);
  return s;
}

TEST(LevenshteinProperties, MatchesRecursiveOracleAndIsAMetric) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const int alphabet = 2 + static_cast<int>(rng() % 4);
    std::string a = random_string(rng, 16, alphabet);
    std::string b = random_string(rng, 16, alphabet);
    std::string c = random_string(rng, 16, alphabet);
    const std::size_t ab = levenshtein(a, b);
    EXPECT_EQ(ab, oracle::levenshtein_recursive(a, b)) << a << " / " << b;
    EXPECT_EQ(ab, levenshtein(b, a));
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(levenshtein(a, c), ab + levenshtein(b, c));
    const double sim = lev_similarity(a, b);
    EXPECT_GE(sim, 0.0);
    EXPECT_LE(sim, 1.0);
  }
}

TEST(CommonWordsProperties, BoundedByDistinctCounts) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 200; ++i) {
    TermBag a = multi_shingle(random_letters(rng() % 30, SourceKind::chord, rng()));
    TermBag b = multi_shingle(random_letters(rng() % 30, SourceKind::chord, rng()));
    const std::size_t n = common_words(a, b);
    EXPECT_LE(n, std::min(a.distinct(), b.distinct()));
    EXPECT_EQ(n, common_words(b, a));
    EXPECT_EQ(common_words(a, a), a.distinct());
  }
}

TEST(SeedTest, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(42, 0), derive_seed(42, 0));
  EXPECT_NE(derive_seed(42, 0), derive_seed(42, 1));
  EXPECT_NE(derive_seed(42, 0), derive_seed(43, 0));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(draw_below(rng, 5), 5u);
  EXPECT_THROW(draw_below(rng, 0), std::invalid_argument);
}

TEST(SummaryTest, PopulationStatistics) {
  const double v[] = {1, 2, 3, 4};
  Summary s = summarize(v);
  EXPECT_EQ(s.count, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(1.25));
  EXPECT_EQ(summarize({}).count, 0u);
}

TEST(ProtocolTest, IdenticalCliquesSaturate) {
  Index index = Index::build(docs_from(identical_cliques(10, 5, 30, 1)));
  RetrievalMetrics m = run_retrieval_protocol(index, 42);
  EXPECT_DOUBLE_EQ(m.mt10, 4.0);
  EXPECT_DOUBLE_EQ(m.mt1, 1.0);
  EXPECT_EQ(m.repeats, 5);
  EXPECT_EQ(m.queries, 5u * 10u * 4u);
}

TEST(ProtocolTest, DisjointCliquesAlwaysHitFirst) {
  // Each clique shares one private term; no term crosses cliques.
  std::vector<DocRecord> docs;
  std::mt19937_64 rng(3);
  for (int c = 0; c < 8; ++c) {
    for (int r = 0; r < 5; ++r) {
      DocRecord d;
      d.doc_id = "w" + std::to_string(c) + "_r" + std::to_string(r);
      d.work_id = "w" + std::to_string(c);
      d.bag.add("shared" + std::to_string(c));
      for (int k = 0; k < 4; ++k) d.bag.add(d.doc_id + "_" + std::to_string(rng() % 100), 1 + rng() % 3);
      docs.push_back(std::move(d));
    }
  }
  RetrievalMetrics m = run_retrieval_protocol(Index::build(docs), 7);
  EXPECT_DOUBLE_EQ(m.mt1, 1.0);
  EXPECT_DOUBLE_EQ(m.mt10, 4.0);
}

SyntheticSpec noisy_spec(std::size_t cliques, double edit_rate, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.cliques = cliques;
  spec.length = 60;
  spec.edit_rate = edit_rate;
  spec.seed = seed;
  return spec;
}

TEST(ProtocolTest, DeterministicAndRepeatAveraged) {
  Index index = Index::build(docs_from(generate_synthetic(noisy_spec(20, 0.4, 5))));
  RetrievalMetrics a = run_retrieval_protocol(index, 9);
  EXPECT_EQ(run_retrieval_protocol(index, 9), a);

  double mt10 = 0, mt1 = 0;
  for (int r = 0; r < 5; ++r) {
    RetrievalMetrics one = run_protocol_repeat(index, derive_seed(9, r));
    EXPECT_LE(one.mt10, 4.0);
    EXPECT_EQ(one.queries, 20u * 4u);
    const double hits = one.mt1 * static_cast<double>(one.queries);
    EXPECT_DOUBLE_EQ(hits, std::round(hits));
    mt10 += one.mt10;
    mt1 += one.mt1;
  }
  EXPECT_DOUBLE_EQ(a.mt10, mt10 / 5);
  EXPECT_DOUBLE_EQ(a.mt1, mt1 / 5);
  EXPECT_EQ(run_retrieval_protocol(index, 9, 1), run_protocol_repeat(index, derive_seed(9, 0)));
}

TEST(ProtocolTest, SingletonCliqueRejected) {
  auto recs = identical_cliques(3, 3, 20, 1);
  recs.push_back({"lonely", "lonely_r0", "bcdefg"});
  Index index = Index::build(docs_from(recs));
  try {
    run_retrieval_protocol(index, 1);
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("lonely"), std::string::npos) << e.what();
  }
  EXPECT_THROW(run_retrieval_protocol(index, 1, 0), ConfigError);
}

TEST(SourceComboTest, ParseAndLabel) {
  EXPECT_EQ(SourceCombo::parse("me+ch").label(), "ch+me");
  EXPECT_EQ(SourceCombo::parse("ch+ch").label(), "ch");
  EXPECT_EQ(SourceCombo::parse("cr+ch"), SourceCombo::parse("ch+cr"));
  EXPECT_THROW(SourceCombo::parse("xx"), ConfigError);
  EXPECT_THROW(SourceCombo::parse(""), ConfigError);
  EXPECT_THROW(SourceCombo::parse("ch+"), ConfigError);
}

// Chord sources carry the clique signal; melody docs are independent noise.
CorpusSnapshot multi_source_snapshot(std::size_t cliques, std::uint64_t seed) {
  auto ch = generate_synthetic(noisy_spec(cliques, 0.3, seed));
  auto cr = generate_synthetic(noisy_spec(cliques, 0.3, seed));
  std::vector<SyntheticRecording> me = ch;
  for (std::size_t i = 0; i < me.size(); ++i) me[i].letters = random_letters(60, SourceKind::melody, seed * 1000 + i);
  auto docs = docs_from(ch, SourceAlgo::ch);
  for (auto& d : docs_from(cr, SourceAlgo::cr)) docs.push_back(std::move(d));
  for (auto& d : docs_from(me, SourceAlgo::me)) docs.push_back(std::move(d));
  return snapshot_from(std::move(docs));
}

TEST(CombinationTest, SingletonEqualsSingleSource) {
  CorpusSnapshot snap = multi_source_snapshot(15, 2);
  const SourceCombo combos[] = {SourceCombo::parse("ch")};
  auto results = run_combination_study(snap, combos, 120, 42);
  ASSERT_EQ(results.size(), 1u);
  Index single = Index::build(select_docs(snap, SourceAlgo::ch, 120));
  EXPECT_EQ(results[0].metrics, run_retrieval_protocol(single, 42));
}

TEST(CombinationTest, OrderInvariant) {
  CorpusSnapshot snap = multi_source_snapshot(15, 2);
  const SourceCombo a[] = {SourceCombo({SourceAlgo::ch, SourceAlgo::cr})};
  const SourceCombo b[] = {SourceCombo({SourceAlgo::cr, SourceAlgo::ch})};
  EXPECT_EQ(run_combination_study(snap, a, 120, 42)[0].metrics, run_combination_study(snap, b, 120, 42)[0].metrics);
}

TEST(CombinationTest, NoiseSourceBarelyMovesResults) {
  CorpusSnapshot snap = multi_source_snapshot(30, 4);
  const SourceCombo combos[] = {SourceCombo::parse("ch"), SourceCombo::parse("ch+me"), SourceCombo::parse("me")};
  auto results = run_combination_study(snap, combos, 120, 42);
  EXPECT_NEAR(results[1].metrics.mt10, results[0].metrics.mt10, 0.25);
  EXPECT_LT(results[2].metrics.mt10, 1.0);
}

TEST(CombinationTest, CombinedDocsSumTheirBags) {
  CorpusSnapshot snap = multi_source_snapshot(3, 6);
  auto combined = combine_sources(snap, SourceCombo::parse("ch+me"), 120);
  ASSERT_EQ(combined.size(), 15u);
  const DocRecord& d = combined[0];
  EXPECT_EQ(d.doc_id, d.meta.recording_id + ":ch+me:120");
  auto ch = select_docs(snap, SourceAlgo::ch, 120);
  auto me = select_docs(snap, SourceAlgo::me, 120);
  EXPECT_EQ(d.bag.length(), ch[0].bag.length() + me[0].bag.length());
}

TEST(CombinationTest, MissingSourceNamesRecording) {
  CorpusSnapshot snap = multi_source_snapshot(3, 6);
  auto it = std::find_if(snap.docs.begin(), snap.docs.end(),
                         [](const DocRecord& d) { return d.meta.sources[0] == SourceAlgo::cr; });
  const std::string lost = it->meta.recording_id;
  snap.docs.erase(it);
  try {
    combine_sources(snap, SourceCombo::parse("ch+cr"), 120);
    FAIL() << "expected MissingSource";
  } catch (const MissingSource& e) {
    EXPECT_NE(std::string(e.what()).find(lost + ":cr"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(combine_sources(snap, SourceCombo::parse("ch+me"), 120));
}

TEST(MultiRefTest, IdenticalCliquesFindTheirReference) {
  auto docs = docs_from(identical_cliques(10, 5, 30, 8));
  for (std::size_t n : {1u, 4u}) {
    RetrievalMetrics m = run_multi_recording_study(docs, n, {}, 42);
    EXPECT_DOUBLE_EQ(m.mt1, 1.0) << n;
    EXPECT_DOUBLE_EQ(m.mt10, 1.0) << n;
    EXPECT_EQ(m.queries, 5u * 10u * (5 - n));
  }
}

TEST(MultiRefTest, MoreReferencesHelpOnNoisyCorpus) {
  auto docs = docs_from(generate_synthetic(noisy_spec(50, 0.5, 42)));
  RetrievalMetrics one = run_multi_recording_study(docs, 1, {}, 42);
  RetrievalMetrics four = run_multi_recording_study(docs, 4, {}, 42);
  EXPECT_GE(four.mt10, one.mt10);
  EXPECT_EQ(run_multi_recording_study(docs, 4, {}, 42), four);
}

TEST(MultiRefTest, CliqueTooSmall) {
  auto docs = docs_from(identical_cliques(2, 5, 20, 1));
  EXPECT_THROW(run_multi_recording_study(docs, 5, {}, 42), ProtocolError);
  EXPECT_THROW(run_multi_recording_study(docs, 0, {}, 42), ConfigError);
}

TEST(PairwiseTest, IdenticalCliques) {
  CorpusSnapshot snap = snapshot_from(docs_from(identical_cliques(4, 5, 30, 2)));
  auto stats = run_pairwise(snap);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats[0].source, SourceAlgo::ch);
  EXPECT_EQ(stats[0].lev_similarity.count, 4u * 10u);
  EXPECT_DOUBLE_EQ(stats[0].lev_similarity.mean, 1.0);
  EXPECT_DOUBLE_EQ(stats[0].lev_similarity.stddev, 0.0);
  EXPECT_DOUBLE_EQ(stats[0].jaccard.mean, 1.0);
  EXPECT_GT(stats[0].common_words.min, 0.0);
}

TEST(PairwiseTest, SummaryOrdering) {
  CorpusSnapshot snap = snapshot_from(docs_from(generate_synthetic(noisy_spec(6, 0.3, 3))));
  for (const auto& s : run_pairwise(snap)) {
    for (const Summary* m : {&s.lev_similarity, &s.common_words, &s.jaccard}) {
      EXPECT_LE(m->min, m->mean);
      EXPECT_LE(m->mean, m->max);
      EXPECT_GE(m->stddev, 0.0);
    }
    EXPECT_GE(s.lev_similarity.min, 0.0);
    EXPECT_LE(s.lev_similarity.max, 1.0);
  }
}

TEST(BenchTest, SingleDocCorpus) {
  CorpusSnapshot snap = snapshot_from(docs_from(identical_cliques(1, 1, 40, 1)));
  auto reports = run_bench(snap);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].docs, 1u);
  EXPECT_GE(reports[0].samples, 30u);
  EXPECT_EQ(reports[0].query_ms.count, reports[0].samples);
  EXPECT_GE(reports[0].ingest_ms.mean, 0.0);
  EXPECT_GE(reports[0].query_ms.min, 0.0);
}

TEST(ReportTest, CsvShapes) {
  std::ostringstream r, p, b;
  RetrievalRow row{"retrieval", "ch+me", 30, 0, {3.25, 0.5, 8, 5}};
  write_retrieval_csv(r, std::span(&row, 1));
  EXPECT_EQ(r.str(), "study,sources,duration_s,n_refs,queries,mt10,mt1\nretrieval,ch+me,30,0,8,3.250000,0.500000\n");

  CorpusSnapshot snap = snapshot_from(docs_from(identical_cliques(2, 3, 20, 1)));
  auto stats = run_pairwise(snap);
  write_pairwise_csv(p, stats);
  EXPECT_EQ(p.str().substr(0, p.str().find('\n')), "source,duration_s,metric,pairs,mean,min,max,stddev");
  EXPECT_NE(p.str().find("ch,120,levenshtein_similarity,6,1.000000,1.000000,1.000000,0.000000\n"),
            std::string::npos)
      << p.str();

  TimingReport t{SourceAlgo::me, 120, 2, 30, {}, {}};
  write_bench_csv(b, std::span(&t, 1));
  EXPECT_EQ(b.str(),
            "source,duration_s,docs,samples,ingest_mean_ms,ingest_stddev_ms,query_mean_ms,query_stddev_ms\n"
            "me,120,2,30,0.000000,0.000000,0.000000,0.000000\n");
}

}  // namespace
}  // namespace claraprint
