#include "wildcut/vad.h"

#include <algorithm>
#include <cmath>

#include "wildcut/error.h"

namespace wildcut {
namespace {

constexpr double kSilentFrameDb = -200.0;

std::vector<TimeSpan> pad_and_merge(std::vector<TimeSpan> regions, double pad_s,
                                    double duration_s) {
  std::vector<TimeSpan> merged;
  for (auto r : regions) {
    r.start_s = std::max(0.0, r.start_s - pad_s);
    r.end_s = std::min(duration_s, r.end_s + pad_s);
    if (!merged.empty() && r.start_s <= merged.back().end_s) {
      merged.back().end_s = std::max(merged.back().end_s, r.end_s);
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

}  // namespace

void validate(const VadParams& p) {
  if (!(p.off_threshold_db < p.on_threshold_db)) {
    throw ConfigError("vad.off_threshold_db must be below vad.on_threshold_db");
  }
  if (!(p.frame_ms > 0 && p.hop_ms > 0 && p.min_speech_s > 0 &&
        p.min_silence_s > 0 && p.speech_pad_s > 0)) {
    throw ConfigError("vad durations must be positive");
  }
}

std::vector<double> frame_levels_db(std::span<const float> samples,
                                    int sample_rate, const VadParams& params) {
  const auto n = static_cast<std::int64_t>(samples.size());
  const auto hop = std::max<std::int64_t>(1, std::llround(params.hop_ms * sample_rate / 1000.0));
  const auto frame = std::max<std::int64_t>(1, std::llround(params.frame_ms * sample_rate / 1000.0));
  if (n == 0) return {};

  std::vector<double> prefix(static_cast<std::size_t>(n + 1), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = samples[static_cast<std::size_t>(i)];
    prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + x * x;
  }
  const double whole = prefix.back() / static_cast<double>(n);
  const std::int64_t cells = (n + hop - 1) / hop;
  std::vector<double> levels(static_cast<std::size_t>(cells), kSilentFrameDb);
  if (whole <= 0.0) return levels;

  for (std::int64_t i = 0; i < cells; ++i) {
    const std::int64_t lo = std::clamp<std::int64_t>(i * hop + hop / 2 - frame / 2, 0, n);
    const std::int64_t hi = std::clamp<std::int64_t>(lo + frame, 0, n);
    if (hi <= lo) continue;
    const double energy = (prefix[static_cast<std::size_t>(hi)] -
                           prefix[static_cast<std::size_t>(lo)]) /
                          static_cast<double>(hi - lo);
    if (energy > 0.0) levels[static_cast<std::size_t>(i)] = 10.0 * std::log10(energy / whole);
  }
  return levels;
}

std::vector<TimeSpan> reference_vad(std::span<const float> samples,
                                    int sample_rate, const VadParams& params) {
  validate(params);
  const auto n = static_cast<std::int64_t>(samples.size());
  if (n == 0) return {};
  const auto hop = std::max<std::int64_t>(1, std::llround(params.hop_ms * sample_rate / 1000.0));
  const double hop_s = static_cast<double>(hop) / sample_rate;
  const double duration_s = static_cast<double>(n) / sample_rate;
  const auto levels = frame_levels_db(samples, sample_rate, params);
  const auto silence_cells =
      static_cast<std::int64_t>(std::ceil(params.min_silence_s / hop_s - 1e-9));

  std::vector<TimeSpan> regions;
  auto close = [&](std::int64_t first, std::int64_t last) {
    const double start = static_cast<double>(first * hop) / sample_rate;
    const double end = static_cast<double>(std::min(n, (last + 1) * hop)) / sample_rate;
    if (end - start >= params.min_speech_s) regions.push_back({start, end});
  };

  bool speaking = false;
  std::int64_t first = 0;
  std::int64_t last_active = 0;
  std::int64_t quiet_run = 0;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(levels.size()); ++i) {
    const double level = levels[static_cast<std::size_t>(i)];
    if (!speaking) {
      if (level > params.on_threshold_db) {
        speaking = true;
        first = last_active = i;
        quiet_run = 0;
      }
      continue;
    }
    if (level < params.off_threshold_db) {
      if (++quiet_run >= silence_cells) {
        close(first, last_active);
        speaking = false;
      }
    } else {
      last_active = i;
      quiet_run = 0;
    }
  }
  if (speaking) close(first, last_active);
  return pad_and_merge(std::move(regions), params.speech_pad_s, duration_s);
}

}  // namespace wildcut
