#include "wildcut/filter.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "wildcut/error.h"
#include "wildcut/text.h"

namespace wildcut {

void validate(const FilterParams& p) {
  if (!(p.min_lang_confidence >= 0.0 && p.min_lang_confidence <= 1.0)) {
    throw ConfigError("filter.min_lang_confidence must be in [0, 1]");
  }
  if (!(p.min_quality >= 1.0 && p.min_quality <= 5.0)) {
    throw ConfigError("filter.min_quality must be in [1, 5]");
  }
  if (!(p.iqr_multiplier >= 0.0)) throw ConfigError("filter.iqr_multiplier must be >= 0");
  if (!(p.min_duration_s >= 0.0)) throw ConfigError("filter.min_duration_s must be >= 0");
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ContractViolation("quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("quantile: p outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<bool> char_dur_outlier_flags(std::span<const double> values,
                                         double iqr_multiplier,
                                         std::size_t min_count) {
  if (values.empty()) throw ContractViolation("char_dur_outlier_flags: empty input");
  for (double v : values) {
    if (!(v > 0.0)) throw ContractViolation("char_dur_outlier_flags: values must be positive");
  }
  std::vector<bool> flags(values.size(), false);
  if (values.size() < min_count) return flags;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile(sorted, 0.25);
  const double q3 = quantile(sorted, 0.75);
  const double fence = iqr_multiplier * (q3 - q1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    flags[i] = values[i] > q3 + fence || values[i] < q1 - fence;
  }
  return flags;
}

FilterOutcome apply_filters(const std::vector<SegmentRecord>& records,
                            const FilterParams& params) {
  std::vector<std::optional<DropReason>> reason(records.size());

  auto language_reason = [&](const SegmentRecord& r) -> std::optional<DropReason> {
    if (!params.target_languages.contains(r.language)) return DropReason::kNotTargetLanguage;
    if (r.lang_confidence < params.min_lang_confidence) return DropReason::kLowLangConfidence;
    return std::nullopt;
  };

  std::optional<DropReason> source_language_failure;
  if (params.language_granularity == DropGranularity::kSource) {
    for (const auto& r : records) {
      if (auto why = language_reason(r)) {
        source_language_failure = why;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (auto why = language_reason(r)) {
      reason[i] = why;
    } else if (source_language_failure) {
      reason[i] = source_language_failure;
    } else if (params.quality_inclusive ? r.dnsmos_ovrl < params.min_quality
                                        : !(r.dnsmos_ovrl > params.min_quality)) {
      reason[i] = DropReason::kLowQualityScore;
    } else if (r.duration_s < params.min_duration_s) {
      reason[i] = DropReason::kTooShort;
    } else if (count_non_whitespace(r.text) == 0) {
      reason[i] = DropReason::kEmptyTranscript;
    }
  }

  std::vector<std::size_t> survivors;
  std::vector<double> char_durs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (reason[i]) continue;
    survivors.push_back(i);
    char_durs.push_back(records[i].duration_s /
                        static_cast<double>(count_non_whitespace(records[i].text)));
  }
  if (!survivors.empty()) {
    const auto flags = char_dur_outlier_flags(char_durs, params.iqr_multiplier,
                                              params.min_segments_for_iqr);
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      if (flags[k]) reason[survivors[k]] = DropReason::kCharDurOutlier;
    }
  }

  FilterOutcome out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!reason[i]) {
      out.kept.push_back(records[i]);
      continue;
    }
    out.drops.push_back({records[i].segment_id, records[i].source_id, "filter",
                         *reason[i], records[i].duration_s, ""});
  }
  return out;
}

}  // namespace wildcut
