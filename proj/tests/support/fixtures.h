#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wildcut/config.h"

namespace fixtures {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "wildcut-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

// Mono sine as 16-bit PCM.
void write_sine_wav(const fs::path& path, int sample_rate, double seconds, double freq_hz,
                    double amplitude);

// Speech-like synthetic corpus of `sources` files of `seconds` each, with
// fixture sidecars, using the library generator.
void make_synthetic_corpus(const fs::path& dir, int sources, double seconds, std::uint64_t seed = 7);

// Ten 60 s sources whose sidecars are laid out so that the unfiltered
// segments cover 56.86 % of the raw audio and the kept ones 29.43 %.
void make_retention_corpus(const fs::path& dir);

// Defaults pointed at `inputs` and `out`.
wildcut::RunConfig config_for(const fs::path& inputs, const fs::path& out, int parallel = 1);

// report.json without the wall-time dependent keys.
nlohmann::json report_without_timing(const fs::path& out_dir);

// Path of the protocol test worker built next to the tests.
std::string fake_worker();

}  // namespace fixtures
