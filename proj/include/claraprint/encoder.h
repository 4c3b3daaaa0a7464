#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claraprint/types.h"

namespace claraprint {

/// Root of a chord label: a natural A-G followed by any run of '#'/'b'.
/// Everything after the accidentals (quality, extensions, bass) is ignored.
/// Returns nullopt for "N", "X" and anything not starting with A-G.
std::optional<PitchClass> parse_chord_root(std::string_view label);

/// Nearest equal-tempered pitch class (A4 = 440 Hz). Non-positive and
/// non-finite frequencies are unvoiced frames and map to nullopt.
std::optional<PitchClass> hz_to_pitch_class(double hz);

/// Keeps events with onset in [start_at, start_at + duration) and confidence
/// >= confidence_min, reduces each to a pitch class and drops the timing.
std::vector<PitchClass> clean_events(const AnnotationDoc& doc, const EncoderConfig& cfg);

/// Collapses runs of equal consecutive pitch classes.
std::vector<PitchClass> dedup(std::span<const PitchClass> progression);

/// Throws std::invalid_argument if the progression has consecutive duplicates.
std::vector<Interval> to_intervals(std::span<const PitchClass> progression);

std::string encode_letters(std::span<const Interval> intervals, SourceKind kind);

/// Inverse of encode_letters; throws std::invalid_argument on a letter that is
/// not an emitted code of `kind`'s alphabet.
std::vector<Interval> decode_letters(std::string_view letters, SourceKind kind);

struct Fingerprint {
  Claraprint print;
  /// Fewer letters than the smallest shingle width; indexes as an empty document.
  bool degenerate = false;
};

Fingerprint fingerprint(const AnnotationDoc& doc, const EncoderConfig& cfg);

}  // namespace claraprint
