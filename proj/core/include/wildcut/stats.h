#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wildcut/types.h"

namespace wildcut {

struct Summary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

// One row of the three-phase table.
struct StatsBlock {
  Summary duration;  // seconds
  Summary quality;   // DNSMOS OVRL
  double total_duration_h = 0.0;
  double retention_pct = 0.0;  // of the raw total
  std::size_t count = 0;
};

// Population statistics of the two lists (which may differ in length when
// some segments have no score). Empty lists give zeros; retention is 0 when
// raw_total_h is 0.
StatsBlock compute_stats(std::span<const double> durations_s,
                         std::span<const double> qualities,
                         double raw_total_h);

struct RunReport {
  StatsBlock raw;
  StatsBlock processed_unfiltered;
  StatsBlock processed;
  std::map<std::string, double> per_language_h;
  std::map<std::string, std::size_t> drop_counts;
  std::size_t sources = 0;
  std::size_t failed_sources = 0;
  double wall_clock_s = 0.0;
  std::optional<double> throughput_h_per_min;  // nullopt when wall time is 0
  std::map<std::string, double> per_stage_s;
};

// raw_total_h / (wall_clock_s / 60); nullopt for non-positive wall time.
std::optional<double> throughput_h_per_min(double raw_total_h, double wall_clock_s);

// Keys whose values depend on wall time; stripped when comparing reports.
inline constexpr const char* kTimingKeys[] = {"wall_clock_s", "throughput_h_per_min",
                                              "per_stage_s"};

// Every drop reason appears in drop_counts, zero or not.
RunReport build_report(const StatsBlock& raw, const StatsBlock& unfiltered,
                       const StatsBlock& processed,
                       const std::map<std::string, double>& per_language_h,
                       std::span<const DropRecord> drops, double wall_clock_s,
                       std::map<std::string, double> per_stage_s = {});

nlohmann::ordered_json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

// Text table with the Raw / Processed w/o Filtering / Processed rows.
std::string render_table(const RunReport& report);

}  // namespace wildcut
