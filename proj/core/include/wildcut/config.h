#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wildcut/backends.h"
#include "wildcut/filter.h"
#include "wildcut/segment.h"
#include "wildcut/standardize.h"
#include "wildcut/vad.h"

namespace wildcut {

// Everything a run needs. Loaded from TOML with sections [run], [loudness],
// [vad], [segmentation], [filter] and [backends.<stage>]; see
// core/data/defaults.toml for every key and its default.
struct RunConfig {
  std::vector<std::string> inputs;  // files, directories or glob patterns
  std::filesystem::path out_dir = "wildcut-out";
  int parallel_sources = 0;  // 0 selects the number of CPU cores
  bool keep_intermediates = false;
  bool write_segment_audio = true;
  std::string language_hint;  // empty: no hint
  std::vector<std::string> extensions{".wav", ".flac", ".mp3", ".ogg"};

  LoudnessParams loudness;
  VadParams vad;
  SegmentationParams segmentation;
  FilterParams filter;
  // One descriptor per stage, in pipeline order.
  std::vector<BackendDescriptor> backends;

  const BackendDescriptor& backend(Stage stage) const;
  BackendDescriptor& backend(Stage stage);
  // parallel_sources with 0 resolved to the hardware thread count.
  int effective_parallelism() const;
};

RunConfig default_config();

// A problem found while loading or checking a configuration. `line` and
// `column` are 1-based and set for syntax errors only.
struct Diagnostic {
  std::string severity = "error";  // "error" or "warning"
  std::string field;               // dotted key, empty for file-level issues
  std::string message;
  int line = 0;
  int column = 0;
};

std::string diagnostic_to_json(const Diagnostic& d);

struct LoadResult {
  RunConfig config;
  std::vector<Diagnostic> diagnostics;
  bool ok() const;  // no error-severity diagnostics
};

// Parses `file` (defaults only when nullopt), applies `overrides` of the
// form dotted.key=value (the value is read as a TOML value and falls back to
// a plain string), converts and checks every invariant. Every problem is
// reported; none throws.
LoadResult load_config(const std::optional<std::filesystem::path>& file,
                       const std::vector<std::string>& overrides = {});

// Like load_config but throws ConfigError listing all errors.
RunConfig load_config_or_throw(const std::optional<std::filesystem::path>& file,
                               const std::vector<std::string>& overrides = {});

// Every violated invariant of every parameter group.
std::vector<Diagnostic> check_config(const RunConfig& config);

// Starts each worker backend and performs a handshake; one diagnostic per
// failure.
std::vector<Diagnostic> probe_backends(const RunConfig& config);

// Compares built-in defaults against the reference values the pipeline is
// specified with and against the checked-in snapshot.
std::vector<Diagnostic> check_reference_defaults();

// Canonical TOML rendering; dump_config(default_config()) is the snapshot.
std::string dump_config(const RunConfig& config);

// The checked-in snapshot compiled into the library.
std::string_view defaults_snapshot();

// Digest of the settings that influence output bytes. Parallelism, paths,
// timeouts and other operational settings are excluded.
std::string config_fingerprint(const RunConfig& config);

}  // namespace wildcut
