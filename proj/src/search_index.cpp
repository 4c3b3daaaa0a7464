#include "claraprint/search_index.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace claraprint {

std::string_view to_string(IdfVariant variant) {
  return variant == IdfVariant::paper ? "paper" : "nonneg";
}

std::optional<IdfVariant> parse_idf_variant(std::string_view text) {
  if (text == "paper") return IdfVariant::paper;
  if (text == "nonneg") return IdfVariant::nonneg;
  return std::nullopt;
}

void BM25Params::validate() const {
  if (!(k1 >= 0.0) || !std::isfinite(k1)) throw ConfigError(fmt::format("k1 must be >= 0, got {}", k1));
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError(fmt::format("b must be in [0, 1], got {}", b));
}

Index::Builder::Builder(BM25Params params) : params_(params) { params_.validate(); }

void Index::Builder::add(DocRecord doc) {
  const auto ordinal = static_cast<std::uint32_t>(docs_.size());
  if (!ordinal_.emplace(doc.doc_id, ordinal).second) {
    throw DuplicateDocId(fmt::format("duplicate doc_id '{}'", doc.doc_id));
  }
  for (const auto& [term, tf] : doc.bag) postings_[term].push_back({ordinal, tf});
  docs_.push_back(std::move(doc));
}

Index Index::Builder::build() && {
  Index index;
  index.params_ = params_;
  index.docs_ = std::move(docs_);
  index.ordinal_ = std::move(ordinal_);
  index.postings_ = std::move(postings_);

  const std::size_t n = index.docs_.size();
  index.stats_.n_docs = n;
  if (n > 0) {
    std::uint64_t total = 0;
    for (const auto& d : index.docs_) total += d.doc_len();
    index.stats_.avgdl = static_cast<double>(total) / static_cast<double>(n);
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return index.docs_[a].doc_id < index.docs_[b].doc_id;
  });
  index.id_rank_.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) index.id_rank_[order[r]] = r;
  return index;
}

Index Index::build(std::vector<DocRecord> docs, BM25Params params) {
  Builder builder(params);
  for (auto& d : docs) builder.add(std::move(d));
  return std::move(builder).build();
}

const DocRecord* Index::find(std::string_view doc_id) const {
  auto it = ordinal_.find(std::string(doc_id));
  return it == ordinal_.end() ? nullptr : &docs_[it->second];
}

std::span<const Posting> Index::postings(const std::string& term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

double Index::idf(const std::string& term) const {
  if (stats_.n_docs == 0) return 0.0;
  const double n_total = static_cast<double>(stats_.n_docs);
  const double n_term = static_cast<double>(doc_frequency(term));
  const double ratio = (n_total - n_term + 0.5) / (n_term + 0.5);
  return params_.idf == IdfVariant::paper ? std::log(ratio) : std::log(1.0 + ratio);
}

double Index::term_weight(double idf, std::uint32_t tf, std::uint64_t doc_len) const {
  const double f = static_cast<double>(tf);
  const double norm = 1.0 - params_.b + params_.b * static_cast<double>(doc_len) / stats_.avgdl;
  return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

double Index::score(std::string_view doc_id, const TermBag& query) const {
  auto it = ordinal_.find(std::string(doc_id));
  if (it == ordinal_.end()) throw UnknownDocId(fmt::format("unknown doc_id '{}'", doc_id));
  const DocRecord& doc = docs_[it->second];
  double total = 0.0;
  for (const auto& [term, qtf] : query) {
    const std::uint32_t tf = doc.bag.count(term);
    if (tf == 0) continue;
    total += term_weight(idf(term), tf, doc.doc_len());
  }
  return total;
}

std::vector<SearchHit> Index::search(const TermBag& query, std::size_t top_k,
                                     std::span<const std::string> exclude) const {
  std::vector<SearchHit> hits;
  if (top_k == 0 || docs_.empty()) return hits;

  std::vector<double> acc(docs_.size(), 0.0);
  std::vector<char> touched(docs_.size(), 0);
  std::vector<std::uint32_t> candidates;

  for (const auto& [term, qtf] : query) {
    auto list = postings(term);
    if (list.empty()) continue;
    const double term_idf = idf(term);
    for (const Posting& p : list) {
      acc[p.doc] += term_weight(term_idf, p.tf, docs_[p.doc].doc_len());
      if (!touched[p.doc]) {
        touched[p.doc] = 1;
        candidates.push_back(p.doc);
      }
    }
  }
  for (const auto& id : exclude) {
    auto it = ordinal_.find(id);
    if (it != ordinal_.end()) touched[it->second] = 0;
  }

  std::erase_if(candidates, [&](std::uint32_t d) { return !touched[d] || !(acc[d] > 0.0); });
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (acc[a] != acc[b]) return acc[a] > acc[b];
    return id_rank_[a] < id_rank_[b];
  };
  const std::size_t keep = std::min(top_k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), better);

  hits.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) hits.push_back({docs_[candidates[i]].doc_id, acc[candidates[i]]});
  return hits;
}

}  // namespace claraprint
