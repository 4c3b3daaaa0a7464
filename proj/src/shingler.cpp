#include "claraprint/shingler.h"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace claraprint {

namespace {

int parse_width(std::string_view token) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ConfigError(fmt::format("invalid shingle width '{}'", token));
  }
  return value;
}

}  // namespace

WidthSet::WidthSet() : widths_{2, 3, 4, 5, 6, 7} {}

WidthSet::WidthSet(std::span<const int> widths) : widths_(widths.begin(), widths.end()) {
  if (widths_.empty()) throw ConfigError("shingle width set is empty");
  for (int w : widths_) {
    if (w < kMinShingleWidth || w > kMaxShingleWidth) {
      throw ConfigError(fmt::format("shingle width {} outside [{}, {}]", w, kMinShingleWidth,
                                    kMaxShingleWidth));
    }
  }
  std::sort(widths_.begin(), widths_.end());
  widths_.erase(std::unique(widths_.begin(), widths_.end()), widths_.end());
}

WidthSet WidthSet::parse(std::string_view text) {
  std::vector<int> widths;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) throw ConfigError("empty item in width list");
    auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      widths.push_back(parse_width(item));
      continue;
    }
    int lo = parse_width(item.substr(0, dash));
    int hi = parse_width(item.substr(dash + 1));
    if (lo > hi) throw ConfigError(fmt::format("descending width range '{}'", item));
    for (int w = lo; w <= hi; ++w) widths.push_back(w);
  }
  return WidthSet(widths);
}

std::string WidthSet::to_string() const {
  bool contiguous = widths_.size() > 1 && widths_.back() - widths_.front() + 1 ==
                                              static_cast<int>(widths_.size());
  if (contiguous) return fmt::format("{}-{}", widths_.front(), widths_.back());
  return fmt::format("{}", fmt::join(widths_, ","));
}

void TermBag::add(std::string_view term, std::uint32_t n) {
  if (n == 0) return;
  auto it = counts_.find(term);
  if (it == counts_.end()) {
    counts_.emplace(std::string(term), n);
  } else {
    it->second += n;
  }
  length_ += n;
}

void TermBag::merge(const TermBag& other) {
  for (const auto& [term, n] : other.counts_) add(term, n);
}

std::uint32_t TermBag::count(std::string_view term) const {
  auto it = counts_.find(term);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::string> shingle(std::string_view s, int width) {
  if (width < kMinShingleWidth || width > kMaxShingleWidth) {
    throw std::invalid_argument(fmt::format("shingle width {} outside [2, 7]", width));
  }
  std::vector<std::string> out;
  const auto w = static_cast<std::size_t>(width);
  if (s.size() < w) return out;
  out.reserve(s.size() - w + 1);
  for (std::size_t i = 0; i + w <= s.size(); ++i) out.emplace_back(s.substr(i, w));
  return out;
}

TermBag multi_shingle(std::string_view s, const WidthSet& widths) {
  TermBag bag;
  for (int width : widths.values()) {
    const auto w = static_cast<std::size_t>(width);
    for (std::size_t i = 0; i + w <= s.size(); ++i) bag.add(s.substr(i, w));
  }
  return bag;
}

TermBag combine(std::span<const Claraprint> prints, const WidthSet& widths) {
  TermBag bag;
  for (const auto& print : prints) bag.merge(multi_shingle(print.letters, widths));
  return bag;
}

}  // namespace claraprint
