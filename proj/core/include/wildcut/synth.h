#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wildcut {

// Speech-like synthetic corpus: bursts of amplitude-modulated harmonic tones
// ("utterances") separated by near-silent gaps, one or more speakers per
// source. Each WAV gets a <file>.fixture.json sidecar describing its speaker
// turns, language and character rate for the fixture-aware mock backends.
struct SynthSpec {
  double total_hours = 1.0;
  double source_duration_s = 300.0;  // the last source takes the remainder
  int sample_rate = 16000;
  std::uint64_t seed = 1;
  int max_speakers = 3;
  // Fraction of sources labelled with a language outside the default
  // target set, and of sources with a low language confidence.
  double off_target_fraction = 0.1;
  double low_confidence_fraction = 0.1;
  bool write_fixtures = true;
};

struct SynthSource {
  std::filesystem::path path;
  double duration_s = 0.0;
};

// Writes the corpus under `dir` (created if needed) and returns the files in
// name order. Output depends only on the spec.
std::vector<SynthSource> generate_corpus(const std::filesystem::path& dir, const SynthSpec& spec);

}  // namespace wildcut
