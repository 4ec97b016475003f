#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "wildcut/types.h"

namespace wildcut {

enum class DropGranularity { kSegment, kSource };

struct FilterParams {
  std::set<std::string> target_languages{"en", "zh", "de", "fr", "ja", "ko"};
  double min_lang_confidence = 0.80;
  double min_quality = 3.0;
  bool quality_inclusive = false;  // keep scores equal to min_quality
  double min_duration_s = 3.0;
  double iqr_multiplier = 1.5;
  // Sources with fewer surviving segments skip the character-duration test.
  std::size_t min_segments_for_iqr = 4;
  // kSource drops every segment of a source once any segment fails the
  // language test.
  DropGranularity language_granularity = DropGranularity::kSegment;
};

void validate(const FilterParams& params);

// Type-7 sample quantile of already sorted values. Throws ContractViolation
// on empty input or p outside [0, 1].
double quantile(std::span<const double> sorted, double p);

// Flags values outside [Q1 - m*IQR, Q3 + m*IQR] (strictly). Returns all
// false when fewer than `min_count` values are given. Throws
// ContractViolation for empty input or non-positive values.
std::vector<bool> char_dur_outlier_flags(std::span<const double> avg_char_durs,
                                         double iqr_multiplier,
                                         std::size_t min_count = 4);

struct FilterOutcome {
  std::vector<SegmentRecord> kept;
  std::vector<DropRecord> drops;
};

// Applies the filtering criteria to all records of one source, recording
// the first failing reason per record:
//   1. language in target set and confidence >= min_lang_confidence
//   2. quality > min_quality
//   3. duration >= min_duration_s
//   -  non-empty transcript
//   4. per-source character-duration IQR fence over the survivors
// Kept and dropped records preserve input order.
FilterOutcome apply_filters(const std::vector<SegmentRecord>& records,
                            const FilterParams& params);

}  // namespace wildcut
