#include "claraprint/corpus_store.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <tuple>

#include "claraprint/errors.h"
#include "claraprint/synthetic.h"
#include "support/temp_dir.h"

namespace claraprint {
namespace {

using testsupport::TempDir;

constexpr const char* kMinimal = R"({
  "recording_id": "r1", "work_id": "w1", "source": "ch", "start_at_s": 0, "live": false,
  "events": [{"time_s": 0.0, "duration_s": 2.0, "value": "C", "confidence": 0.9},
             {"time_s": 2.0, "duration_s": 2.0, "value": "G"}]
})";

std::string chord_json(const std::string& rec, const std::string& work, const std::vector<std::string>& labels,
                       const std::string& source = "ch") {
  std::string events;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) events += ",";
    events += R"({"time_s": )" + std::to_string(i) + R"(, "duration_s": 1, "value": ")" + labels[i] + R"("})";
  }
  return R"({"recording_id": ")" + rec + R"(", "work_id": ")" + work + R"(", "source": ")" + source +
         R"(", "events": [)" + events + "]}";
}

AnnotationDoc chord_doc(const std::string& rec, const std::string& work, const std::vector<std::string>& labels) {
  return parse_annotation(chord_json(rec, work, labels));
}

TEST(ParseAnnotationTest, MinimalFile) {
  AnnotationDoc doc = parse_annotation(kMinimal);
  EXPECT_EQ(doc.recording_id, "r1");
  EXPECT_EQ(doc.work_id, "w1");
  EXPECT_EQ(doc.source, SourceAlgo::ch);
  ASSERT_EQ(doc.events.size(), 2u);
  EXPECT_EQ(std::get<std::string>(doc.events[0].value), "C");
  EXPECT_DOUBLE_EQ(doc.events[0].confidence, 0.9);
  EXPECT_DOUBLE_EQ(doc.events[1].confidence, 1.0);
}

TEST(ParseAnnotationTest, EventsSortedOnLoad) {
  AnnotationDoc doc = parse_annotation(R"({"recording_id": "r", "work_id": "w", "source": "cr",
    "events": [{"time_s": 4, "value": "A"}, {"time_s": 1, "value": "B"}, {"time_s": 2, "value": "C"}]})");
  ASSERT_EQ(doc.events.size(), 3u);
  EXPECT_EQ(doc.events[0].time_s, 1.0);
  EXPECT_EQ(doc.events[1].time_s, 2.0);
  EXPECT_EQ(doc.events[2].time_s, 4.0);
}

TEST(ParseAnnotationTest, UnvoicedMelodyFramesLoadIntact) {
  AnnotationDoc doc = parse_annotation(R"({"recording_id": "r", "work_id": "w", "source": "me",
    "events": [{"time_s": 0, "value": 440.0}, {"time_s": 0.1, "value": -1.0}, {"time_s": 0.2, "value": 261.63}]})");
  ASSERT_EQ(doc.events.size(), 3u);
  EXPECT_EQ(std::get<double>(doc.events[1].value), -1.0);
}

TEST(ParseAnnotationTest, UnknownFieldsIgnoredAndMetadataKept) {
  AnnotationDoc doc = parse_annotation(R"({"recording_id": "r", "work_id": "w", "source": "ch",
    "title": "Sonata", "composer": "Anon", "extra": [1, 2], "events": []})");
  EXPECT_EQ(doc.metadata.at("title"), "Sonata");
  EXPECT_EQ(doc.metadata.at("composer"), "Anon");
  EXPECT_EQ(doc.metadata.count("extra"), 0u);
}

TEST(ParseAnnotationTest, MalformedJsonNamesLocation) {
  try {
    parse_annotation("{\n  \"recording_id\": ,\n}", "bad.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:2:"), std::string::npos) << e.what();
  }
}

TEST(ParseAnnotationTest, MissingRequiredFields) {
  const std::vector<std::pair<std::string, std::string>> fields{
      {"recording_id", R"("r")"}, {"work_id", R"("w")"}, {"source", R"("ch")"}, {"events", "[]"}};
  for (const auto& [skip, unused] : fields) {
    std::string text = "{";
    for (const auto& [key, value] : fields) {
      if (key == skip) continue;
      if (text.size() > 1) text += ", ";
      text += "\"" + key + "\": " + value;
    }
    text += "}";
    try {
      parse_annotation(text, "x.json");
      FAIL() << "accepted without " << skip;
    } catch (const SchemaError& e) {
      EXPECT_NE(std::string(e.what()).find(skip), std::string::npos) << e.what();
    }
  }
}

TEST(ParseAnnotationTest, IllTypedValues) {
  EXPECT_THROW(parse_annotation(R"({"recording_id": "r", "work_id": "w", "source": "zz", "events": []})"),
               SchemaError);
  EXPECT_THROW(parse_annotation(R"({"recording_id": "r", "work_id": "w", "source": "ch",
    "events": [{"time_s": 0, "value": 440.0}]})"),
               SchemaError);
  EXPECT_THROW(parse_annotation(R"({"recording_id": "r", "work_id": "w", "source": "me",
    "events": [{"time_s": 0, "value": "A"}]})"),
               SchemaError);
  EXPECT_THROW(parse_annotation(R"({"recording_id": "r", "work_id": "w", "source": "ch",
    "events": [{"time_s": 0, "value": "A", "confidence": 1.5}]})"),
               SchemaError);
  EXPECT_THROW(parse_annotation(R"([1, 2])"), SchemaError);
}

TEST(MaterializeTest, SharedWorkMakesOneClique) {
  std::vector<AnnotationDoc> anns;
  for (int i = 0; i < 5; ++i) anns.push_back(chord_doc("r" + std::to_string(i), "w1", {"C", "G", "A", "F"}));
  Materialized m = materialize(anns, EncoderConfig{});
  ASSERT_EQ(m.snapshot.cliques.size(), 1u);
  EXPECT_EQ(m.snapshot.cliques[0].work_id, "w1");
  EXPECT_EQ(m.snapshot.cliques[0].recording_ids.size(), 5u);
  EXPECT_EQ(m.snapshot.docs.size(), 5u);
  EXPECT_TRUE(m.report.warnings.empty());
}

TEST(MaterializeTest, TwoSourcesTwoDocs) {
  AnnotationDoc ch = chord_doc("r1", "w1", {"C", "G", "A"});
  AnnotationDoc me = parse_annotation(R"({"recording_id": "r1", "work_id": "w1", "source": "me",
    "events": [{"time_s": 0, "value": 440.0}, {"time_s": 1, "value": 261.63}, {"time_s": 2, "value": 329.63}]})");
  std::vector<AnnotationDoc> anns{ch, me};
  Materialized m = materialize(anns, EncoderConfig{});
  ASSERT_EQ(m.snapshot.docs.size(), 2u);
  EXPECT_EQ(m.snapshot.docs[0].doc_id, "r1:ch:120");
  EXPECT_EQ(m.snapshot.docs[1].doc_id, "r1:me:120");
  ASSERT_EQ(m.snapshot.cliques.size(), 1u);
  EXPECT_EQ(m.snapshot.cliques[0].recording_ids, std::vector<std::string>{"r1"});
}

TEST(MaterializeTest, DegenerateKeptEmptyWithWarning) {
  std::vector<AnnotationDoc> anns{chord_doc("r1", "w1", {"C"}), chord_doc("r2", "w1", {"C", "G", "A"})};
  Materialized m = materialize(anns, EncoderConfig{});
  ASSERT_EQ(m.snapshot.docs.size(), 2u);
  EXPECT_TRUE(m.snapshot.docs[0].bag.empty());
  EXPECT_TRUE(m.snapshot.docs[0].meta.degenerate);
  EXPECT_EQ(m.report.degenerate_doc_ids, std::vector<std::string>{"r1:ch:120"});
  ASSERT_EQ(m.report.warnings.size(), 1u);
  EXPECT_NE(m.report.warnings[0].find("r1:ch:120"), std::string::npos);
}

TEST(MaterializeTest, ConflictingWorkIsWarnedAndSkipped) {
  std::vector<AnnotationDoc> anns{chord_doc("r1", "w1", {"C", "G", "A"}), chord_doc("r1", "w2", {"C", "G", "A"})};
  Materialized m = materialize(anns, EncoderConfig{});
  EXPECT_EQ(m.snapshot.docs.size(), 1u);
  EXPECT_EQ(m.report.warnings.size(), 1u);
}

TEST(MaterializeTest, SeveralDurationsCoexist) {
  SnapshotConfig cfg;
  cfg.durations = {30, 120};
  std::vector<AnnotationDoc> anns{chord_doc("r1", "w1", {"C", "G", "A"})};
  Materialized m = materialize(anns, cfg);
  ASSERT_EQ(m.snapshot.docs.size(), 2u);
  EXPECT_EQ(m.snapshot.docs[0].doc_id, "r1:ch:120");
  EXPECT_EQ(m.snapshot.docs[1].doc_id, "r1:ch:30");
}

std::vector<AnnotationDoc> synthetic_annotations(std::size_t cliques, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.cliques = cliques;
  spec.length = 40;
  spec.seed = seed;
  std::vector<AnnotationDoc> out;
  for (const auto& rec : generate_synthetic(spec)) out.push_back(to_annotation(rec, SourceAlgo::ch));
  spec.kind = SourceKind::melody;
  for (const auto& rec : generate_synthetic(spec)) out.push_back(to_annotation(rec, SourceAlgo::me));
  return out;
}

TEST(MaterializeProperties, OrderIndependentAndDeterministic) {
  auto anns = synthetic_annotations(6, 3);
  SnapshotConfig cfg;
  cfg.durations = {30, 120};
  Materialized a = materialize(anns, cfg);
  EXPECT_EQ(materialize(anns, cfg).snapshot, a.snapshot);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(anns.begin(), anns.end(), rng);
    EXPECT_EQ(materialize(anns, cfg).snapshot, a.snapshot);
  }
}

TEST(MaterializeProperties, DocIdMapsToOneTriple) {
  auto anns = synthetic_annotations(5, 4);
  SnapshotConfig cfg;
  cfg.durations = {30, 120};
  Materialized m = materialize(anns, cfg);
  std::set<std::tuple<std::string, SourceAlgo, int>> triples;
  for (const auto& d : m.snapshot.docs) {
    ASSERT_EQ(d.meta.sources.size(), 1u);
    EXPECT_EQ(d.doc_id, make_doc_id(d.meta.recording_id, d.meta.sources[0], d.meta.duration_s));
    EXPECT_TRUE(triples.emplace(d.meta.recording_id, d.meta.sources[0], d.meta.duration_s).second);
  }
  EXPECT_EQ(triples.size(), m.snapshot.docs.size());
  for (const auto& d : m.snapshot.docs) {
    auto owners = std::count_if(m.snapshot.cliques.begin(), m.snapshot.cliques.end(),
                                [&](const Clique& c) { return c.work_id == d.work_id; });
    EXPECT_EQ(owners, 1);
  }
}

TEST(SnapshotTest, RoundTrip) {
  TempDir dir;
  auto anns = synthetic_annotations(4, 9);
  anns.push_back(chord_doc("solo", "w_solo", {"C"}));
  anns.back().metadata = {{"title", "Étude"}, {"composer", "X"}};
  SnapshotConfig cfg;
  cfg.durations = {30, 120};
  cfg.confidence_min = 0.25;
  cfg.widths = WidthSet::parse("2,4-5");
  cfg.bm25 = {0.9, 0.4, IdfVariant::paper};
  CorpusSnapshot snap = materialize(anns, cfg).snapshot;

  save_snapshot(snap, dir / "a.snap");
  CorpusSnapshot loaded = load_snapshot(dir / "a.snap");
  EXPECT_EQ(loaded, snap);
  save_snapshot(loaded, dir / "b.snap");
  EXPECT_EQ(testsupport::read_file(dir / "a.snap"), testsupport::read_file(dir / "b.snap"));
}

TEST(SnapshotTest, EmptySnapshot) {
  TempDir dir;
  save_snapshot(CorpusSnapshot{}, dir / "empty.snap");
  CorpusSnapshot loaded = load_snapshot(dir / "empty.snap");
  EXPECT_TRUE(loaded.docs.empty());
  EXPECT_TRUE(loaded.cliques.empty());
  EXPECT_EQ(loaded.version, kSnapshotVersion);
}

TEST(SnapshotTest, BumpedMajorVersionRejected) {
  std::string text = serialize_snapshot(CorpusSnapshot{});
  auto pos = text.find("\"1.0\"");
  ASSERT_NE(pos, std::string::npos);
  std::string bumped = text;
  bumped.replace(pos, 5, "\"2.0\"");
  EXPECT_THROW(parse_snapshot(bumped), VersionError);
  std::string minor = text;
  minor.replace(pos, 5, "\"1.7\"");
  EXPECT_NO_THROW(parse_snapshot(minor));
}

TEST(SnapshotTest, MalformedInputs) {
  EXPECT_THROW(parse_snapshot("not json\n"), ParseError);
  EXPECT_THROW(parse_snapshot(R"({"kind":"doc"})"), SchemaError);
  std::string text = serialize_snapshot(materialize(synthetic_annotations(2, 1), EncoderConfig{}).snapshot);
  auto first_doc = text.find('\n') + 1;
  auto second_doc = text.find('\n', first_doc) + 1;
  std::string duplicated = text;
  duplicated.insert(second_doc, text.substr(first_doc, second_doc - first_doc));
  EXPECT_THROW(parse_snapshot(duplicated), Error);
}

TEST(LoadAnnotationDirTest, ToleratesBadFiles) {
  TempDir dir;
  dir.write("a.json", chord_json("r1", "w1", {"C", "G"}));
  dir.write("b.json", "{ broken");
  dir.write("c.json", chord_json("r2", "w1", {"D", "A"}));
  dir.write("notes.txt", "ignored");
  AnnotationBatch batch = load_annotation_dir(dir.path());
  ASSERT_EQ(batch.docs.size(), 2u);
  EXPECT_EQ(batch.docs[0].recording_id, "r1");
  EXPECT_EQ(batch.docs[1].recording_id, "r2");
  ASSERT_EQ(batch.failures.size(), 1u);
  EXPECT_EQ(batch.failures[0].path.filename(), "b.json");

  EXPECT_THROW(load_annotation_dir(dir / "missing"), Error);
  EXPECT_EQ(load_annotations(dir / "a.json").size(), 1u);
}

}  // namespace
}  // namespace claraprint
