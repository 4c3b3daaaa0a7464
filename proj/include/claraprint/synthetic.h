#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "claraprint/types.h"

namespace claraprint {

/// Seeded generator of clique-structured fingerprints for tests and benchmarks:
/// each clique has a random base string and every variant applies a fixed
/// number of random substitutions, insertions and deletions to it.
struct SyntheticSpec {
  std::size_t cliques = 50;
  std::size_t variants = 5;
  std::size_t length = 150;
  double edit_rate = 0.10;
  SourceKind kind = SourceKind::chord;
  std::uint64_t seed = 42;
};

struct SyntheticRecording {
  std::string work_id;
  std::string recording_id;
  std::string letters;
};

std::vector<SyntheticRecording> generate_synthetic(const SyntheticSpec& spec);

/// Random string of `length` emitted interval codes of `kind`'s alphabet.
std::string random_letters(std::size_t length, SourceKind kind, std::uint64_t seed);

/// Annotation whose fingerprint under any window covering all events is
/// exactly `rec.letters`. Events are `spacing_s` apart starting at start_at_s;
/// chord sources get labels with varied qualities, melody sources frequencies
/// spread over several octaves.
AnnotationDoc to_annotation(const SyntheticRecording& rec, SourceAlgo source, double spacing_s = 0.5,
                            double start_at_s = 0.0, int first_pitch = 0);

}  // namespace claraprint
