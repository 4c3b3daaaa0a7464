#include "claraprint/synthetic.h"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "claraprint/encoder.h"
#include "claraprint/eval.h"

namespace claraprint {

namespace {

char random_code(std::mt19937_64& rng, std::string_view alphabet) {
  return alphabet[1 + draw_below(rng, 11)];
}

std::string mutate(std::string s, std::size_t edits, std::string_view alphabet, std::mt19937_64& rng) {
  for (std::size_t e = 0; e < edits; ++e) {
    const std::size_t op = s.empty() ? 1 : draw_below(rng, 3);
    if (op == 0) {
      const std::size_t pos = draw_below(rng, s.size());
      char c = s[pos];
      while (c == s[pos]) c = random_code(rng, alphabet);
      s[pos] = c;
    } else if (op == 1) {
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(draw_below(rng, s.size() + 1)), random_code(rng, alphabet));
    } else {
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(draw_below(rng, s.size())));
    }
  }
  return s;
}

}  // namespace

std::string random_letters(std::size_t length, SourceKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto alphabet = alphabet_for(kind);
  std::string s(length, ' ');
  for (char& c : s) c = random_code(rng, alphabet);
  return s;
}

std::vector<SyntheticRecording> generate_synthetic(const SyntheticSpec& spec) {
  const auto alphabet = alphabet_for(spec.kind);
  const auto edits = static_cast<std::size_t>(std::lround(spec.edit_rate * static_cast<double>(spec.length)));
  std::vector<SyntheticRecording> out;
  out.reserve(spec.cliques * spec.variants);
  for (std::size_t c = 0; c < spec.cliques; ++c) {
    const std::uint64_t clique_seed = derive_seed(spec.seed, c);
    const std::string base = random_letters(spec.length, spec.kind, clique_seed);
    const std::string work_id = fmt::format("w{:03}", c);
    for (std::size_t v = 0; v < spec.variants; ++v) {
      std::mt19937_64 rng(derive_seed(clique_seed, v + 1));
      out.push_back({work_id, fmt::format("{}_r{}", work_id, v), mutate(base, edits, alphabet, rng)});
    }
  }
  return out;
}

AnnotationDoc to_annotation(const SyntheticRecording& rec, SourceAlgo source, double spacing_s,
                            double start_at_s, int first_pitch) {
  static constexpr std::string_view kNames[] = {"C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
  static constexpr std::string_view kQualities[] = {"", ":min", "maj7", ":7/3", "m", ":sus4"};

  AnnotationDoc doc;
  doc.recording_id = rec.recording_id;
  doc.work_id = rec.work_id;
  doc.source = source;
  doc.start_at_s = start_at_s;

  const SourceKind kind = kind_of(source);
  PitchClass pc = PitchClass::wrap(first_pitch);
  std::vector<PitchClass> pitches{pc};
  for (Interval iv : decode_letters(rec.letters, kind)) {
    pc = iv.apply(pc);
    pitches.push_back(pc);
  }
  for (std::size_t i = 0; i < pitches.size(); ++i) {
    Event e;
    e.time_s = start_at_s + spacing_s * static_cast<double>(i);
    e.duration_s = spacing_s;
    if (kind == SourceKind::chord) {
      e.value = std::string(kNames[pitches[i].value()]) + std::string(kQualities[i % std::size(kQualities)]);
    } else {
      const int midi = 48 + 12 * static_cast<int>(i % 3) + pitches[i].value();
      e.value = 440.0 * std::exp2((midi - 69) / 12.0);
    }
    doc.events.push_back(std::move(e));
  }
  return doc;
}

}  // namespace claraprint
