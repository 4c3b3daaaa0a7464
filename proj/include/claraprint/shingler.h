#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claraprint/types.h"

namespace claraprint {

inline constexpr int kMinShingleWidth = 2;
inline constexpr int kMaxShingleWidth = 7;

/// Non-empty set of shingle widths, each in [kMinShingleWidth, kMaxShingleWidth].
class WidthSet {
 public:
  /// The [2-7] default.
  WidthSet();
  /// Throws ConfigError on an empty list or an out-of-range width.
  explicit WidthSet(std::span<const int> widths);

  /// Accepts "2-7", "3", "2,4,6" and mixes such as "2,4-5".
  static WidthSet parse(std::string_view text);

  const std::vector<int>& values() const { return widths_; }
  /// Canonical text form, e.g. "2-7" or "2,4,6".
  std::string to_string() const;

  bool operator==(const WidthSet&) const = default;

 private:
  std::vector<int> widths_;  // sorted, unique
};

/// Multiset of shingle words; the indexable document.
class TermBag {
 public:
  using Counts = std::map<std::string, std::uint32_t, std::less<>>;

  void add(std::string_view term, std::uint32_t n = 1);
  void merge(const TermBag& other);

  std::uint32_t count(std::string_view term) const;
  bool contains(std::string_view term) const { return counts_.find(term) != counts_.end(); }
  std::size_t distinct() const { return counts_.size(); }
  /// Sum of multiplicities.
  std::uint64_t length() const { return length_; }
  bool empty() const { return length_ == 0; }

  const Counts& counts() const { return counts_; }
  Counts::const_iterator begin() const { return counts_.begin(); }
  Counts::const_iterator end() const { return counts_.end(); }

  bool operator==(const TermBag&) const = default;

 private:
  Counts counts_;
  std::uint64_t length_ = 0;
};

/// The |s| - w + 1 contiguous substrings of length w, in order.
/// Throws std::invalid_argument when w is outside [2, 7].
std::vector<std::string> shingle(std::string_view s, int width);

TermBag multi_shingle(std::string_view s, const WidthSet& widths = WidthSet());

/// Shingles each claraprint on its own and sums the bags, so no term ever
/// straddles two prints.
TermBag combine(std::span<const Claraprint> prints, const WidthSet& widths = WidthSet());

}  // namespace claraprint
