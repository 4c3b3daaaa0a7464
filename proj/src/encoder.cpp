#include "claraprint/encoder.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "claraprint/shingler.h"

namespace claraprint {

std::string_view to_string(SourceAlgo source) {
  switch (source) {
    case SourceAlgo::ch:
      return "ch";
    case SourceAlgo::cr:
      return "cr";
    case SourceAlgo::me:
      return "me";
    case SourceAlgo::mp:
      return "mp";
  }
  return "?";
}

std::string_view to_string(SourceKind kind) { return kind == SourceKind::chord ? "chord" : "melody"; }

std::optional<SourceAlgo> parse_source(std::string_view tag) {
  for (SourceAlgo s : kAllSources) {
    if (to_string(s) == tag) return s;
  }
  return std::nullopt;
}

void EncoderConfig::validate() const {
  if (duration_s != 30 && duration_s != 120) {
    throw ConfigError("duration must be 30 or 120 seconds, got " + std::to_string(duration_s));
  }
  if (!(confidence_min >= 0.0)) throw ConfigError("confidence_min must be >= 0");
}

std::optional<PitchClass> parse_chord_root(std::string_view label) {
  if (label.empty()) return std::nullopt;
  // C D E F G A B
  static constexpr int kNaturals[] = {9, 11, 0, 2, 4, 5, 7};
  char root = label.front();
  if (root < 'A' || root > 'G') return std::nullopt;
  int pc = kNaturals[root - 'A'];
  for (char c : label.substr(1)) {
    if (c == '#') {
      ++pc;
    } else if (c == 'b') {
      --pc;
    } else {
      break;
    }
  }
  return PitchClass::wrap(pc);
}

std::optional<PitchClass> hz_to_pitch_class(double hz) {
  if (!std::isfinite(hz) || hz <= 0.0) return std::nullopt;
  // std::round rounds halves away from zero.
  double midi = std::round(69.0 + 12.0 * std::log2(hz / 440.0));
  return PitchClass::wrap(static_cast<long long>(midi));
}

namespace {

std::optional<PitchClass> reduce(const Event& event, SourceKind kind) {
  if (kind == SourceKind::chord) {
    if (const auto* label = std::get_if<std::string>(&event.value)) return parse_chord_root(*label);
    return std::nullopt;
  }
  if (const auto* hz = std::get_if<double>(&event.value)) return hz_to_pitch_class(*hz);
  return std::nullopt;
}

}  // namespace

std::vector<PitchClass> clean_events(const AnnotationDoc& doc, const EncoderConfig& cfg) {
  std::vector<const Event*> ordered;
  ordered.reserve(doc.events.size());
  for (const auto& e : doc.events) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Event* a, const Event* b) { return a->time_s < b->time_s; });

  const double begin = doc.start_at_s;
  const double end = doc.start_at_s + cfg.duration_s;
  const SourceKind kind = kind_of(doc.source);

  std::vector<PitchClass> out;
  for (const Event* e : ordered) {
    if (e->time_s < begin || e->time_s >= end) continue;
    if (e->confidence < cfg.confidence_min) continue;
    if (auto pc = reduce(*e, kind)) out.push_back(*pc);
  }
  return out;
}

std::vector<PitchClass> dedup(std::span<const PitchClass> progression) {
  std::vector<PitchClass> out;
  out.reserve(progression.size());
  for (PitchClass pc : progression) {
    if (out.empty() || out.back() != pc) out.push_back(pc);
  }
  return out;
}

std::vector<Interval> to_intervals(std::span<const PitchClass> progression) {
  std::vector<Interval> out;
  if (progression.size() < 2) return out;
  out.reserve(progression.size() - 1);
  for (std::size_t i = 0; i + 1 < progression.size(); ++i) {
    out.push_back(Interval::between(progression[i], progression[i + 1]));
  }
  return out;
}

std::string encode_letters(std::span<const Interval> intervals, SourceKind kind) {
  const std::string_view alphabet = alphabet_for(kind);
  std::string out;
  out.reserve(intervals.size());
  for (Interval iv : intervals) out.push_back(alphabet[iv.value()]);
  return out;
}

std::vector<Interval> decode_letters(std::string_view letters, SourceKind kind) {
  const std::string_view alphabet = alphabet_for(kind);
  std::vector<Interval> out;
  out.reserve(letters.size());
  for (char c : letters) {
    auto pos = alphabet.find(c);
    if (pos == std::string_view::npos || pos < 1 || pos > 11) {
      throw std::invalid_argument(std::string("letter '") + c + "' is not a " +
                                  std::string(to_string(kind)) + " interval code");
    }
    out.emplace_back(static_cast<int>(pos));
  }
  return out;
}

Fingerprint fingerprint(const AnnotationDoc& doc, const EncoderConfig& cfg) {
  cfg.validate();
  auto progression = dedup(clean_events(doc, cfg));
  auto intervals = to_intervals(progression);

  Fingerprint fp;
  fp.print.letters = encode_letters(intervals, kind_of(doc.source));
  fp.print.source = doc.source;
  fp.print.recording_id = doc.recording_id;
  fp.print.work_id = doc.work_id;
  fp.print.duration_s = cfg.duration_s;
  fp.degenerate = fp.print.letters.size() < static_cast<std::size_t>(kMinShingleWidth);
  return fp;
}

}  // namespace claraprint
