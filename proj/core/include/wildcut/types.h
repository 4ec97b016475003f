#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wildcut {

inline constexpr int kStandardSampleRate = 24000;

// Processing stages in pipeline order. The numeric order is the order in
// which a source must traverse them.
enum class SourceStatus {
  kPending = 0,
  kStandardized,
  kSeparated,
  kDiarized,
  kSegmented,
  kTranscribed,
  kFiltered,
  kDone,
  kFailed,
};

std::string_view to_string(SourceStatus status);

struct AudioSource {
  std::string source_id;
  std::filesystem::path path;
  double duration_s = 0.0;
  std::optional<std::string> language_hint;
  SourceStatus status = SourceStatus::kPending;
  std::string failure_reason;

  // Moves to `next`, which must be the immediate successor of the current
  // status (or kFailed). Throws ContractViolation otherwise.
  void advance(SourceStatus next);
  void fail(std::string reason);
};

// Half-open time interval in seconds.
struct TimeSpan {
  double start_s = 0.0;
  double end_s = 0.0;

  double duration() const { return end_s - start_s; }
  bool operator==(const TimeSpan&) const = default;
};

struct SpeakerTurn {
  std::string speaker_label;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const SpeakerTurn&) const = default;
};

struct VadChunk {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string speaker_label;

  bool operator==(const VadChunk&) const = default;
};

struct Segment {
  std::string segment_id;
  std::string speaker_label;
  double start_s = 0.0;
  double end_s = 0.0;

  double duration_s() const { return end_s - start_s; }
  bool operator==(const Segment&) const = default;
};

// One manifest row.
struct SegmentRecord {
  std::string segment_id;
  std::string wav_path;  // relative to the output directory
  std::string text;
  std::string language;
  double lang_confidence = 0.0;
  std::string speaker_label;
  double duration_s = 0.0;
  double dnsmos_ovrl = 0.0;
  double avg_char_dur_s = 0.0;
  std::string source_id;

  bool operator==(const SegmentRecord&) const = default;
};

enum class DropReason {
  kNotTargetLanguage,
  kLowLangConfidence,
  kLowQualityScore,
  kTooShort,
  kCharDurOutlier,
  kDecodeError,
  kBackendError,
  kEmptyTranscript,
};

inline constexpr DropReason kAllDropReasons[] = {
    DropReason::kNotTargetLanguage, DropReason::kLowLangConfidence,
    DropReason::kLowQualityScore,   DropReason::kTooShort,
    DropReason::kCharDurOutlier,    DropReason::kDecodeError,
    DropReason::kBackendError,      DropReason::kEmptyTranscript,
};

std::string_view to_string(DropReason reason);
std::optional<DropReason> drop_reason_from_string(std::string_view name);

// One drops.jsonl row. `id` is a segment_id for segment-level drops and the
// source_id for source-level failures.
struct DropRecord {
  std::string id;
  std::string source_id;
  std::string stage;
  DropReason reason = DropReason::kBackendError;
  double duration_s = 0.0;
  std::string detail;

  bool operator==(const DropRecord&) const = default;
};

// Formats "{source_id}_{index:05d}".
std::string make_segment_id(std::string_view source_id, std::size_t index);

}  // namespace wildcut
