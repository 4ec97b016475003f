#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wildcut/types.h"

namespace wildcut {

// Key order of a manifest line. Part of the file format; do not reorder.
inline constexpr std::string_view kRecordKeys[] = {
    "segment_id",  "wav_path",      "text",       "language",
    "lang_confidence", "speaker_label", "duration_s", "dnsmos_ovrl",
    "avg_char_dur_s",  "source_id",
};

// Renders a float with exactly six decimals ("%.6f"), never "-0.000000".
std::string format_fixed6(double value);

// Serializes one record as a single JSON line (no trailing newline). Floats
// carry six decimals. Equal records give identical bytes.
std::string encode_record(const SegmentRecord& rec);

// Parses and re-validates a manifest line. Throws ParseError (with byte
// offset) for malformed JSON and ValidationError naming the field otherwise.
SegmentRecord decode_record(std::string_view line);

// Checks the invariants of a record; throws ValidationError.
void validate_record(const SegmentRecord& rec);

std::string encode_drop(const DropRecord& drop);
DropRecord decode_drop(std::string_view line);

struct ManifestError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ManifestSummary {
  std::size_t records = 0;
  double total_duration_s = 0.0;
  std::vector<ManifestError> errors;
};

// Reads a manifest and reports per-line problems. Blank lines are errors.
// Throws IoError if the file cannot be opened.
ManifestSummary validate_manifest(const std::filesystem::path& path);

// Writes `lines` (each without newline) to `path` through a temporary file
// and an atomic rename.
void write_lines_atomic(const std::filesystem::path& path,
                        const std::vector<std::string>& lines);

// Reads all lines of a text file (without terminators).
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace wildcut
