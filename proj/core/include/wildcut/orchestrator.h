#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wildcut/config.h"
#include "wildcut/journal.h"
#include "wildcut/stats.h"
#include "wildcut/types.h"

namespace wildcut {

// Stage names used in the journal and in report.per_stage_s, in order.
inline constexpr const char* kPipelineStages[] = {
    "standardize", "separate", "diarize", "vad", "segment", "asr", "quality", "filter"};

// Discovers the input files: explicit files are taken as given, directories
// are searched recursively for the configured extensions, and patterns with
// * ? or [ are expanded. The result is sorted by canonical path with
// duplicates removed. source_id is derived from the path relative to the
// deepest directory containing every input. Throws IoError naming a missing
// or unreadable root and ConfigError when nothing is found.
std::vector<AudioSource> plan(const RunConfig& config);

// Digest of the planned source ids and file sizes.
std::string input_set_hash(std::span<const AudioSource> sources);

struct RunOptions {
  // Terminates the process with std::_Exit once this many sources have
  // finished during this invocation, imitating a crash. When unset, the
  // WILDCUT_FAULT_AFTER_SOURCES environment variable is consulted.
  std::optional<std::size_t> fault_after_sources;
};

struct RunResult {
  RunReport report;
  int exit_code = 0;  // 0 clean, 2 when at least one source failed
  std::size_t sources_total = 0;
  std::size_t sources_processed = 0;  // worked on during this invocation
  std::size_t sources_skipped = 0;    // already complete in the journal
  std::size_t sources_failed = 0;
  std::size_t dispatch_queue_capacity = 0;
  std::size_t dispatch_queue_high_water = 0;
  std::size_t journal_queue_capacity = 0;
  std::size_t journal_queue_high_water = 0;
  std::size_t max_sources_in_flight = 0;
};

// Runs every planned source through standardize, separate, diarize, vad,
// segment, asr, quality and filter, then writes manifest.jsonl, drops.jsonl
// and report.json under out_dir. Per-source failures are recorded and the
// run continues. Refuses an out_dir that already holds a journal.
RunResult run(const RunConfig& config, const RunOptions& options = {});

// Continues the run recorded in out_dir/journal.jsonl: finished sources are
// skipped, unfinished and failed ones are processed again, reusing cached
// stage results where their digests still match. Without a journal this is
// a fresh run. Throws ConfigError when the inputs or output-relevant
// settings differ from the journal.
RunResult resume(const RunConfig& config, const RunOptions& options = {});

struct Throughput {
  std::optional<double> h_per_min;  // nullopt when no wall time was recorded
  double wall_clock_s = 0.0;
  std::map<std::string, double> per_stage_s;
};

// Wall time is the sum of the recorded invocations; per-stage figures sum
// the successful stage entries over all sources.
Throughput measure_throughput(std::span<const JournalEntry> entries, double raw_total_h);

// Accounting check over a finished output directory.
struct RunAudit {
  std::size_t unfiltered_segments = 0;
  std::size_t kept_segments = 0;
  std::size_t dropped_segments = 0;
  double unfiltered_s = 0.0;
  double kept_s = 0.0;
  double dropped_s = 0.0;
  std::vector<std::string> duplicate_ids;
  std::vector<std::string> manifest_errors;
  // kept + dropped == unfiltered in count and (within rounding) duration,
  // no id appears twice and every manifest line validates.
  bool consistent() const;
};

RunAudit audit_output(const std::filesystem::path& out_dir);

}  // namespace wildcut
