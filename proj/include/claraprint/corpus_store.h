#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claraprint/encoder.h"
#include "claraprint/search_index.h"
#include "claraprint/shingler.h"
#include "claraprint/types.h"

namespace claraprint {

/// All recordings of one musical work.
struct Clique {
  std::string work_id;
  std::vector<std::string> recording_ids;  // sorted, distinct
  std::map<std::string, std::string> metadata;

  bool operator==(const Clique&) const = default;
};

/// Configuration a snapshot was materialized with. A snapshot may hold the same
/// recordings under several truncation durations side by side.
struct SnapshotConfig {
  std::vector<int> durations{120};
  double confidence_min = 0.0;
  WidthSet widths;
  BM25Params bm25;

  EncoderConfig encoder(int duration_s) const { return {duration_s, confidence_min}; }
  void validate() const;
  bool operator==(const SnapshotConfig&) const = default;
};

inline constexpr std::string_view kSnapshotVersion = "1.0";

struct CorpusSnapshot {
  std::string version{kSnapshotVersion};
  SnapshotConfig config;
  std::vector<DocRecord> docs;    // sorted by doc_id
  std::vector<Clique> cliques;    // sorted by work_id

  bool operator==(const CorpusSnapshot&) const = default;
};

/// "<recording_id>:<source>:<duration>".
std::string make_doc_id(std::string_view recording_id, SourceAlgo source, int duration_s);

/// Parses one annotation document. `origin` names the input in error messages.
/// Throws ParseError on malformed JSON and SchemaError on missing or ill-typed fields.
AnnotationDoc parse_annotation(std::string_view json_text, std::string_view origin = "<memory>");

/// Loads one annotation file, or every *.json file of a directory (in path order).
std::vector<AnnotationDoc> load_annotations(const std::filesystem::path& path);

struct LoadFailure {
  std::filesystem::path path;
  std::string message;
};

struct AnnotationBatch {
  std::vector<AnnotationDoc> docs;
  std::vector<LoadFailure> failures;
};

/// Loads every *.json file of `dir`, collecting per-file failures instead of
/// aborting. Files are parsed concurrently; results keep path order.
/// Throws Error when `dir` is not a readable directory.
AnnotationBatch load_annotation_dir(const std::filesystem::path& dir);

struct MaterializeReport {
  std::vector<std::string> degenerate_doc_ids;
  std::vector<std::string> warnings;
};

struct Materialized {
  CorpusSnapshot snapshot;
  MaterializeReport report;
};

/// Fingerprints and shingles every annotation under every configured duration.
/// Degenerate fingerprints are kept as empty documents and reported; per-document
/// problems become warnings.
Materialized materialize(std::span<const AnnotationDoc> annotations, const SnapshotConfig& config);
Materialized materialize(std::span<const AnnotationDoc> annotations, const EncoderConfig& encoder,
                         const WidthSet& widths = WidthSet(), const BM25Params& bm25 = {});

/// Regroups docs into cliques by work_id, keeping metadata of existing cliques.
std::vector<Clique> derive_cliques(std::span<const DocRecord> docs,
                                   std::span<const Clique> known = {});

/// Line-oriented JSON: a header record, one record per doc, one per clique.
std::string serialize_snapshot(const CorpusSnapshot& snapshot);
/// Throws ParseError, SchemaError or VersionError (unknown major version).
CorpusSnapshot parse_snapshot(std::string_view text, std::string_view origin = "<memory>");

void save_snapshot(const CorpusSnapshot& snapshot, const std::filesystem::path& path);
CorpusSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace claraprint
