#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "claraprint/errors.h"

namespace claraprint {

/// A pitch with its octave removed: 0 = C, 1 = C#/Db, ..., 11 = B.
class PitchClass {
 public:
  constexpr explicit PitchClass(int value) : value_(static_cast<std::uint8_t>(value)) {
    if (value < 0 || value > 11) throw std::out_of_range("pitch class must be in 0..11");
  }

  /// Reduces any integer (including negatives) modulo 12.
  static constexpr PitchClass wrap(long long value) {
    return PitchClass(static_cast<int>(((value % 12) + 12) % 12));
  }

  constexpr int value() const { return value_; }
  constexpr auto operator<=>(const PitchClass&) const = default;

 private:
  std::uint8_t value_;
};

/// Upward semitone distance between two distinct pitch classes, stored modulo 12.
///
/// Values 1..6 are the closest path going up, 7..11 the closest path going down
/// (7 is a fourth down, 11 a semitone down). The tritone has the single code 6.
class Interval {
 public:
  constexpr explicit Interval(int value) : value_(static_cast<std::uint8_t>(value)) {
    if (value < 1 || value > 11) throw std::out_of_range("interval must be in 1..11");
  }

  /// Throws std::invalid_argument when both pitch classes are equal.
  static constexpr Interval between(PitchClass from, PitchClass to) {
    int diff = ((to.value() - from.value()) % 12 + 12) % 12;
    if (diff == 0) throw std::invalid_argument("no interval between equal pitch classes");
    return Interval(diff);
  }

  constexpr int value() const { return value_; }

  /// Closest-path signed form in -5..6.
  constexpr int signed_steps() const { return value_ <= 6 ? value_ : value_ - 12; }

  constexpr PitchClass apply(PitchClass from) const { return PitchClass::wrap(from.value() + value_); }

  constexpr auto operator<=>(const Interval&) const = default;

 private:
  std::uint8_t value_;
};

enum class SourceAlgo { ch, cr, me, mp };
enum class SourceKind { chord, melody };

constexpr SourceKind kind_of(SourceAlgo source) {
  return (source == SourceAlgo::ch || source == SourceAlgo::cr) ? SourceKind::chord : SourceKind::melody;
}

std::string_view to_string(SourceAlgo source);
std::string_view to_string(SourceKind kind);
std::optional<SourceAlgo> parse_source(std::string_view tag);

inline constexpr SourceAlgo kAllSources[] = {SourceAlgo::ch, SourceAlgo::cr, SourceAlgo::me,
                                             SourceAlgo::mp};

/// One timed value emitted by an extractor: a chord label or a frequency in Hz.
struct Event {
  double time_s = 0.0;
  double duration_s = 0.0;
  std::variant<std::string, double> value;
  double confidence = 1.0;

  bool operator==(const Event&) const = default;
};

/// One extraction run over one recording.
struct AnnotationDoc {
  std::string recording_id;
  std::string work_id;
  SourceAlgo source = SourceAlgo::ch;
  double start_at_s = 0.0;
  bool live = false;
  std::vector<Event> events;
  /// Descriptive fields (title, composer) carried through untouched.
  std::map<std::string, std::string> metadata;

  bool operator==(const AnnotationDoc&) const = default;
};

struct EncoderConfig {
  int duration_s = 120;
  double confidence_min = 0.0;

  /// Throws ConfigError unless duration_s is 30 or 120 and confidence_min >= 0.
  void validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

inline constexpr std::string_view kChordAlphabet = "abcdefghijklmn";
inline constexpr std::string_view kMelodyAlphabet = "opqrstuvwxyz$%";

constexpr std::string_view alphabet_for(SourceKind kind) {
  return kind == SourceKind::chord ? kChordAlphabet : kMelodyAlphabet;
}

/// Interval-letter fingerprint of one recording under one source algorithm.
struct Claraprint {
  std::string letters;
  SourceAlgo source = SourceAlgo::ch;
  std::string recording_id;
  std::string work_id;
  int duration_s = 120;

  bool operator==(const Claraprint&) const = default;
};

}  // namespace claraprint
