#pragma once

// Independent reference implementations used to check the engine. They are
// deliberately naive: no shared code with the library beyond plain types.

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wildcut/types.h"

namespace oracle {

// k-th smallest value (0-based) by counting, without sorting.
double kth_smallest(const std::vector<double>& values, std::size_t k);

// Type-7 sample quantile built on kth_smallest.
double quantile7(const std::vector<double>& values, double p);

// Non-whitespace code points of a UTF-8 string (ASCII whitespace and
// U+3000 are treated as whitespace, which covers the generated corpora).
std::size_t visible_chars(std::string_view utf8);

struct FilterRule {
  std::set<std::string> languages{"en", "zh", "de", "fr", "ja", "ko"};
  double min_conf = 0.80;
  double min_quality = 3.0;
  double min_duration = 3.0;
  double iqr_k = 1.5;
  std::size_t min_iqr_n = 4;
};

// Segment ids kept by the four criteria, evaluated per source.
std::set<std::string> kept_ids(const std::vector<wildcut::SegmentRecord>& records,
                               const FilterRule& rule);

}  // namespace oracle
