#include "wildcut/types.h"

#include <fmt/format.h>

#include "wildcut/error.h"

namespace wildcut {

std::string_view to_string(SourceStatus status) {
  switch (status) {
    case SourceStatus::kPending: return "pending";
    case SourceStatus::kStandardized: return "standardized";
    case SourceStatus::kSeparated: return "separated";
    case SourceStatus::kDiarized: return "diarized";
    case SourceStatus::kSegmented: return "segmented";
    case SourceStatus::kTranscribed: return "transcribed";
    case SourceStatus::kFiltered: return "filtered";
    case SourceStatus::kDone: return "done";
    case SourceStatus::kFailed: return "failed";
  }
  return "unknown";
}

void AudioSource::advance(SourceStatus next) {
  if (status == SourceStatus::kFailed || status == SourceStatus::kDone) {
    throw ContractViolation(fmt::format("source {} is terminal ({})", source_id,
                                        to_string(status)));
  }
  if (next == SourceStatus::kFailed) {
    status = next;
    return;
  }
  if (static_cast<int>(next) != static_cast<int>(status) + 1) {
    throw ContractViolation(fmt::format("source {}: cannot move from {} to {}",
                                        source_id, to_string(status),
                                        to_string(next)));
  }
  status = next;
}

void AudioSource::fail(std::string reason) {
  advance(SourceStatus::kFailed);
  failure_reason = std::move(reason);
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::kNotTargetLanguage: return "not_target_language";
    case DropReason::kLowLangConfidence: return "low_lang_confidence";
    case DropReason::kLowQualityScore: return "low_quality_score";
    case DropReason::kTooShort: return "too_short";
    case DropReason::kCharDurOutlier: return "char_dur_outlier";
    case DropReason::kDecodeError: return "decode_error";
    case DropReason::kBackendError: return "backend_error";
    case DropReason::kEmptyTranscript: return "empty_transcript";
  }
  return "unknown";
}

std::optional<DropReason> drop_reason_from_string(std::string_view name) {
  for (DropReason r : kAllDropReasons) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

std::string make_segment_id(std::string_view source_id, std::size_t index) {
  return fmt::format("{}_{:05d}", source_id, index);
}

}  // namespace wildcut
