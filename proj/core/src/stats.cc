#include "wildcut/stats.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wildcut/error.h"

namespace wildcut {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  // Guard the min <= mean <= max invariant against summation rounding.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

ordered_json summary_json(const Summary& s) {
  return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"std", s.std}};
}

Summary summary_from(const json& j) {
  return {j.at("min").get<double>(), j.at("max").get<double>(),
          j.at("mean").get<double>(), j.at("std").get<double>()};
}

ordered_json block_json(const StatsBlock& b) {
  return {{"count", b.count},
          {"duration_s", summary_json(b.duration)},
          {"quality", summary_json(b.quality)},
          {"total_duration_h", b.total_duration_h},
          {"retention_pct", b.retention_pct}};
}

StatsBlock block_from(const json& j) {
  StatsBlock b;
  b.count = j.at("count").get<std::size_t>();
  b.duration = summary_from(j.at("duration_s"));
  b.quality = summary_from(j.at("quality"));
  b.total_duration_h = j.at("total_duration_h").get<double>();
  b.retention_pct = j.at("retention_pct").get<double>();
  return b;
}

std::string with_thousands(double v) {
  std::string digits = fmt::format("{:.2f}", v);
  const auto dot = digits.find('.');
  std::string head = digits.substr(0, dot);
  const bool negative = !head.empty() && head[0] == '-';
  if (negative) head.erase(0, 1);
  std::string grouped;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (i > 0 && (head.size() - i) % 3 == 0) grouped += ',';
    grouped += head[i];
  }
  return (negative ? "-" : "") + grouped + digits.substr(dot);
}

}  // namespace

StatsBlock compute_stats(std::span<const double> durations_s,
                         std::span<const double> qualities, double raw_total_h) {
  StatsBlock b;
  b.count = durations_s.size();
  b.duration = summarize(durations_s);
  b.quality = summarize(qualities);
  const double total_s = std::accumulate(durations_s.begin(), durations_s.end(), 0.0);
  b.total_duration_h = total_s / 3600.0;
  b.retention_pct = raw_total_h > 0.0 ? 100.0 * b.total_duration_h / raw_total_h : 0.0;
  b.retention_pct = std::clamp(b.retention_pct, 0.0, 100.0);
  return b;
}

std::optional<double> throughput_h_per_min(double raw_total_h, double wall_clock_s) {
  if (!(wall_clock_s > 0.0)) return std::nullopt;
  return raw_total_h / (wall_clock_s / 60.0);
}

RunReport build_report(const StatsBlock& raw, const StatsBlock& unfiltered,
                       const StatsBlock& processed,
                       const std::map<std::string, double>& per_language_h,
                       std::span<const DropRecord> drops, double wall_clock_s,
                       std::map<std::string, double> per_stage_s) {
  RunReport r;
  r.raw = raw;
  r.processed_unfiltered = unfiltered;
  r.processed = processed;
  r.per_language_h = per_language_h;
  for (DropReason reason : kAllDropReasons) r.drop_counts[std::string(to_string(reason))] = 0;
  for (const auto& d : drops) ++r.drop_counts[std::string(to_string(d.reason))];
  r.wall_clock_s = wall_clock_s;
  r.throughput_h_per_min = throughput_h_per_min(raw.total_duration_h, wall_clock_s);
  r.per_stage_s = std::move(per_stage_s);
  return r;
}

ordered_json report_to_json(const RunReport& r) {
  ordered_json j;
  j["schema"] = "wildcut.report/1";
  j["std_kind"] = "population";
  j["sources"] = r.sources;
  j["failed_sources"] = r.failed_sources;
  j["phases"] = {{"raw", block_json(r.raw)},
                 {"processed_unfiltered", block_json(r.processed_unfiltered)},
                 {"processed", block_json(r.processed)}};
  ordered_json langs = ordered_json::object();
  for (const auto& [k, v] : r.per_language_h) langs[k] = v;
  j["per_language_h"] = langs;
  ordered_json drops = ordered_json::object();
  for (const auto& [k, v] : r.drop_counts) drops[k] = v;
  j["drop_counts"] = drops;
  j["wall_clock_s"] = r.wall_clock_s;
  j["throughput_h_per_min"] =
      r.throughput_h_per_min ? ordered_json(*r.throughput_h_per_min) : ordered_json(nullptr);
  ordered_json stages = ordered_json::object();
  for (const auto& [k, v] : r.per_stage_s) stages[k] = v;
  j["per_stage_s"] = stages;
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  try {
    r.sources = j.value("sources", std::size_t{0});
    r.failed_sources = j.value("failed_sources", std::size_t{0});
    const auto& phases = j.at("phases");
    r.raw = block_from(phases.at("raw"));
    r.processed_unfiltered = block_from(phases.at("processed_unfiltered"));
    r.processed = block_from(phases.at("processed"));
    for (const auto& [k, v] : j.at("per_language_h").items()) r.per_language_h[k] = v.get<double>();
    for (const auto& [k, v] : j.at("drop_counts").items()) r.drop_counts[k] = v.get<std::size_t>();
    r.wall_clock_s = j.at("wall_clock_s").get<double>();
    if (!j.at("throughput_h_per_min").is_null()) {
      r.throughput_h_per_min = j.at("throughput_h_per_min").get<double>();
    }
    if (j.contains("per_stage_s")) {
      for (const auto& [k, v] : j.at("per_stage_s").items()) r.per_stage_s[k] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw ValidationError("report", e.what());
  }
  return r;
}

std::string render_table(const RunReport& r) {
  constexpr int kLabel = 25;
  std::string out;
  out += fmt::format("{:<{}}| {:^42} | {:^26} | {:^24}\n", "Dataset", kLabel,
                     "Duration (s)", "DNSMOS P.835 OVRL", "Total Duration (hours)");
  out += fmt::format("{:<{}}| {:>9} {:>10} {:>21} | {:>5} {:>5} {:>14} | {:^24}\n", "",
                     kLabel, "min", "max", "avg ± std", "min", "max", "avg ± std", "");
  out += std::string(kLabel, '-') + "+" + std::string(44, '-') + "+" +
         std::string(28, '-') + "+" + std::string(25, '-') + "\n";
  auto row = [&](const char* label, const StatsBlock& b) {
    const std::string dur_avg =
        fmt::format("{} ± {}", with_thousands(b.duration.mean), with_thousands(b.duration.std));
    const std::string q_avg = fmt::format("{:.2f} ± {:.2f}", b.quality.mean, b.quality.std);
    const std::string total = fmt::format("{:.2f} ({:.2f}%)", b.total_duration_h, b.retention_pct);
    out += fmt::format("{:<{}}| {:>9} {:>10} {:>21} | {:>5.2f} {:>5.2f} {:>14} | {:^24}\n",
                       label, kLabel, with_thousands(b.duration.min),
                       with_thousands(b.duration.max), dur_avg, b.quality.min,
                       b.quality.max, q_avg, total);
  };
  row("Raw", r.raw);
  row("Processed w/o Filtering", r.processed_unfiltered);
  row("Processed", r.processed);
  if (!r.per_language_h.empty()) {
    out += "\nHours by language:";
    for (const auto& [lang, h] : r.per_language_h) out += fmt::format(" {}={:.2f}", lang, h);
    out += "\n";
  }
  if (r.throughput_h_per_min) {
    out += fmt::format("Throughput: {:.2f} hours of raw audio per minute\n",
                       *r.throughput_h_per_min);
  } else {
    out += "Throughput: n/a\n";
  }
  return out;
}

}  // namespace wildcut
