#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "claraprint/shingler.h"
#include "claraprint/types.h"

namespace claraprint {

/// Provenance of an indexed document.
struct DocMeta {
  std::string recording_id;
  /// More than one entry for combined multi-algorithm documents.
  std::vector<SourceAlgo> sources;
  int duration_s = 120;
  /// Plain claraprint letters; empty for combined documents.
  std::string letters;
  bool degenerate = false;

  bool operator==(const DocMeta&) const = default;
};

struct DocRecord {
  std::string doc_id;
  std::string work_id;
  TermBag bag;
  DocMeta meta;

  std::uint64_t doc_len() const { return bag.length(); }
  bool operator==(const DocRecord&) const = default;
};

enum class IdfVariant {
  /// log((N - n + 0.5) / (n + 0.5)); negative once a term is in more than half the docs.
  paper,
  /// log(1 + (N - n + 0.5) / (n + 0.5)); what Lucene-style engines ship.
  nonneg,
};

std::string_view to_string(IdfVariant variant);
std::optional<IdfVariant> parse_idf_variant(std::string_view text);

struct BM25Params {
  double k1 = 1.2;
  double b = 0.75;
  IdfVariant idf = IdfVariant::nonneg;

  /// Throws ConfigError on k1 < 0 or b outside [0, 1].
  void validate() const;
  bool operator==(const BM25Params&) const = default;
};

struct IndexStats {
  std::size_t n_docs = 0;
  double avgdl = 0.0;
};

struct Posting {
  std::uint32_t doc = 0;  // ordinal into Index::docs()
  std::uint32_t tf = 0;
};

struct SearchHit {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const SearchHit&) const = default;
};

/// Immutable inverted index ranked with Okapi BM25. Safe for concurrent readers.
class Index {
 public:
  /// Accumulates documents one at a time; build() publishes the snapshot.
  class Builder {
   public:
    explicit Builder(BM25Params params = {});
    /// Throws DuplicateDocId.
    void add(DocRecord doc);
    Index build() &&;

   private:
    BM25Params params_;
    std::vector<DocRecord> docs_;
    std::unordered_map<std::string, std::uint32_t> ordinal_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
  };

  Index() = default;

  /// Throws DuplicateDocId on repeated identifiers.
  static Index build(std::vector<DocRecord> docs, BM25Params params = {});

  const IndexStats& stats() const { return stats_; }
  const BM25Params& params() const { return params_; }
  const std::vector<DocRecord>& docs() const { return docs_; }
  const DocRecord* find(std::string_view doc_id) const;

  std::span<const Posting> postings(const std::string& term) const;
  std::size_t doc_frequency(const std::string& term) const { return postings(term).size(); }

  double idf(const std::string& term) const;

  /// Throws UnknownDocId.
  double score(std::string_view doc_id, const TermBag& query) const;

  /// Up to top_k documents with score > 0, by descending score then ascending doc_id.
  std::vector<SearchHit> search(const TermBag& query, std::size_t top_k,
                                std::span<const std::string> exclude = {}) const;

 private:
  double term_weight(double idf, std::uint32_t tf, std::uint64_t doc_len) const;

  BM25Params params_;
  IndexStats stats_;
  std::vector<DocRecord> docs_;
  std::vector<std::uint32_t> id_rank_;  // position of each doc in doc_id order
  std::unordered_map<std::string, std::uint32_t> ordinal_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace claraprint
