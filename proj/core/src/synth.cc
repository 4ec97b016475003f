#include "wildcut/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wildcut/audio_io.h"
#include "wildcut/error.h"

namespace wildcut {
namespace {

namespace fs = std::filesystem;

// Portable uniform draws on top of the standard engine; the library's
// distributions are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

struct Utterance {
  double start_s;
  double end_s;
  int speaker;
};

}  // namespace

std::vector<SynthSource> generate_corpus(const fs::path& dir, const SynthSpec& spec) {
  if (!(spec.total_hours > 0) || !(spec.source_duration_s > 0) || spec.sample_rate <= 0) {
    throw ContractViolation("generate_corpus: durations and sample rate must be positive");
  }
  fs::create_directories(dir);
  const double total_s = spec.total_hours * 3600.0;
  const auto count = static_cast<std::size_t>(std::ceil(total_s / spec.source_duration_s - 1e-9));
  static const char* kTargets[] = {"en", "zh", "de", "fr", "ja", "ko"};
  static const char* kOthers[] = {"it", "es", "ru"};

  std::vector<SynthSource> out;
  for (std::size_t idx = 0; idx < count; ++idx) {
    Rng rng(spec.seed * 1000003ULL + idx);
    const double duration =
        std::min(spec.source_duration_s, total_s - spec.source_duration_s * static_cast<double>(idx));
    const int sr = spec.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(duration * sr));
    std::vector<float> samples(n, 0.0f);

    // Low noise floor everywhere.
    const double floor_amp = 0.0005;
    for (auto& s : samples) s = static_cast<float>(floor_amp * (rng.uniform() * 2.0 - 1.0));

    const int speakers = std::max(1, rng.integer(1, std::max(1, spec.max_speakers)));
    std::vector<double> pitch(static_cast<std::size_t>(speakers));
    for (auto& p : pitch) p = rng.uniform(100.0, 260.0);
    // Broadband noise share per source; noisy sources score lower.
    const double noise_share = rng.uniform() < 0.2 ? rng.uniform(0.3, 0.9) : rng.uniform(0.0, 0.05);

    std::vector<Utterance> utterances;
    double t = rng.uniform(0.1, 1.0);
    while (t < duration - 0.5) {
      const double len = std::min(rng.uniform(0.8, 9.0), duration - t);
      const int who = utterances.empty() || rng.uniform() < 0.3
                          ? rng.integer(0, speakers - 1)
                          : utterances.back().speaker;
      utterances.push_back({t, t + len, who});
      t += len + (rng.uniform() < 0.15 ? rng.uniform(2.5, 4.0) : rng.uniform(0.35, 1.6));
    }

    for (const auto& u : utterances) {
      const auto a = static_cast<std::size_t>(u.start_s * sr);
      const auto b = std::min(n, static_cast<std::size_t>(u.end_s * sr));
      const double f0 = pitch[static_cast<std::size_t>(u.speaker)] * rng.uniform(0.95, 1.05);
      const double amp = rng.uniform(0.15, 0.45);
      const double syllable_hz = rng.uniform(3.0, 5.5);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      for (std::size_t i = a; i < b; ++i) {
        const double x = static_cast<double>(i - a) / sr;
        const double env = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * syllable_hz * x + phase);
        double v = 0.0;
        for (int h = 1; h <= 4; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * x) / h;
        v = (1.0 - noise_share) * v * 0.5 + noise_share * (rng.uniform() * 2.0 - 1.0);
        samples[i] += static_cast<float>(amp * env * v);
      }
    }

    const fs::path path = dir / fmt::format("synth_{:05d}.wav", idx);
    write_wav_pcm16(path, samples, sr);

    if (spec.write_fixtures) {
      nlohmann::ordered_json fx;
      const bool off_target = rng.uniform() < spec.off_target_fraction;
      fx["language"] = off_target ? kOthers[rng.integer(0, 2)] : kTargets[rng.integer(0, 5)];
      fx["lang_confidence"] = rng.uniform() < spec.low_confidence_fraction ? rng.uniform(0.3, 0.79)
                                                                           : rng.uniform(0.85, 1.0);
      fx["char_dur_s"] = rng.uniform(0.06, 0.11);
      nlohmann::ordered_json turns = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < utterances.size();) {
        std::size_t j = i;
        while (j + 1 < utterances.size() && utterances[j + 1].speaker == utterances[i].speaker) ++j;
        turns.push_back({{"speaker", fmt::format("spk{}", utterances[i].speaker)},
                         {"start_s", std::max(0.0, utterances[i].start_s - 0.05)},
                         {"end_s", std::min(duration, utterances[j].end_s + 0.05)}});
        i = j + 1;
      }
      fx["turns"] = turns;
      fs::path fixture = path;
      fixture += ".fixture.json";
      std::ofstream(fixture) << fx.dump(1) << "\n";
    }
    out.push_back({path, static_cast<double>(n) / sr});
  }
  return out;
}

}  // namespace wildcut
