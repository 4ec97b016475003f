#include "fixtures.h"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "wildcut/audio_io.h"
#include "wildcut/stats.h"
#include "wildcut/synth.h"

namespace fixtures {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() / fmt::format("{}-{}-{}", tag, ::getpid(), counter++);
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << bytes;
}

void write_sine_wav(const fs::path& path, int sample_rate, double seconds, double freq_hz,
                    double amplitude) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / sample_rate));
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  wildcut::write_wav_pcm16(path, s, sample_rate);
}

void make_synthetic_corpus(const fs::path& dir, int sources, double seconds, std::uint64_t seed) {
  wildcut::SynthSpec spec;
  spec.source_duration_s = seconds;
  spec.total_hours = sources * seconds / 3600.0;
  spec.seed = seed;
  wildcut::generate_corpus(dir, spec);
}

void make_retention_corpus(const fs::path& dir) {
  using nlohmann::json;
  fs::create_directories(dir);
  // Per 60 s source: 34.116 s of segments, of which 17.658 s survive.
  struct Region {
    double start, end;
    const char* language;
    double mos;
  };
  const Region layout[] = {
      {1.000, 18.658, "en", 4.2},   // kept
      {21.658, 31.658, "it", 4.2},  // wrong language
      {34.658, 38.658, "en", 2.5},  // low quality
      {41.658, 44.116, "en", 4.2},  // shorter than 3 s
  };
  for (int i = 0; i < 10; ++i) {
    const fs::path wav = dir / fmt::format("talk_{:02d}.wav", i);
    std::vector<float> samples(60 * 24000);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      samples[k] = static_cast<float>(0.1 * std::sin(2.0 * std::numbers::pi * 220.0 * k / 24000.0));
    }
    wildcut::write_wav_pcm16(wav, samples, 24000);

    json regions = json::array();
    json segments = json::array();
    for (const auto& r : layout) {
      regions.push_back({r.start, r.end});
      const int chars = static_cast<int>(std::lround((r.end - r.start) / 0.08));
      segments.push_back({{"start_s", r.start},
                          {"end_s", r.end},
                          {"text", std::string(static_cast<std::size_t>(chars), 'a')},
                          {"language", r.language},
                          {"lang_confidence", 0.95},
                          {"mos", r.mos}});
    }
    json fx{{"turns", json::array({{{"speaker", "spk0"}, {"start_s", 0.0}, {"end_s", 60.0}}})},
            {"regions", regions},
            {"segments", segments},
            {"mos", 4.0}};
    write_file(fs::path(wav.string() + ".fixture.json"), fx.dump(1));
  }
}

wildcut::RunConfig config_for(const fs::path& inputs, const fs::path& out, int parallel) {
  wildcut::RunConfig cfg = wildcut::default_config();
  cfg.inputs = {inputs.string()};
  cfg.out_dir = out;
  cfg.parallel_sources = parallel;
  return cfg;
}

nlohmann::json report_without_timing(const fs::path& out_dir) {
  nlohmann::json j = nlohmann::json::parse(read_file(out_dir / "report.json"));
  for (const char* key : wildcut::kTimingKeys) j.erase(key);
  return j;
}

std::string fake_worker() { return WILDCUT_FAKE_WORKER; }

}  // namespace fixtures
