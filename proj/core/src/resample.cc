#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wildcut/error.h"
#include "wildcut/standardize.h"

namespace wildcut {
namespace {

// Passband edge and stopband edge as fractions of the lower Nyquist rate.
constexpr double kPassEdge = 0.85;
constexpr double kStopEdge = 1.0;
constexpr double kAttenuationDb = 100.0;
// Above this many phases the kernel is tabulated on a fixed grid and
// linearly interpolated between neighbouring rows.
constexpr std::int64_t kMaxExactPhases = 4096;
constexpr std::int64_t kGridPhases = 4096;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

Resampler::Resampler(int from_hz, int to_hz) {
  if (from_hz <= 0 || to_hz <= 0) {
    throw ContractViolation("resample: sample rates must be positive");
  }
  const std::int64_t g = std::gcd(from_hz, to_hz);
  up_ = to_hz / g;
  down_ = from_hz / g;
  if (up_ == down_) return;

  const double ratio = std::min(1.0, static_cast<double>(up_) / down_);
  cutoff_ = 0.5 * (kPassEdge + kStopEdge) * ratio;
  // Kaiser design: length from attenuation and transition width (radians
  // per sample at the lower rate).
  const double transition = std::numbers::pi * (kStopEdge - kPassEdge);
  const double length_low = (kAttenuationDb - 7.95) / (2.285 * transition);
  half_width_ = static_cast<int>(std::ceil(0.5 * length_low / ratio)) + 1;
  beta_ = 0.1102 * (kAttenuationDb - 8.7);
  i0_beta_ = std::cyl_bessel_i(0.0, beta_);
  taps_ = 2 * half_width_ + 1;

  const bool exact = up_ <= kMaxExactPhases;
  const std::int64_t rows = exact ? up_ : kGridPhases + 1;
  const double denom = exact ? static_cast<double>(up_) : kGridPhases;
  table_.resize(static_cast<std::size_t>(rows * taps_));
  for (std::int64_t r = 0; r < rows; ++r) {
    const double frac = static_cast<double>(r) / denom;
    for (int idx = 0; idx < taps_; ++idx) {
      table_[static_cast<std::size_t>(r * taps_ + idx)] =
          kernel(frac + half_width_ - idx);
    }
  }
}

double Resampler::kernel(double x) const {
  const double w = static_cast<double>(half_width_);
  if (std::abs(x) >= w) return 0.0;
  const double r = x / w;
  const double window = std::cyl_bessel_i(0.0, beta_ * std::sqrt(1.0 - r * r)) / i0_beta_;
  return cutoff_ * sinc(cutoff_ * x) * window;
}

std::vector<float> Resampler::process(std::span<const float> input) const {
  if (up_ == down_) return {input.begin(), input.end()};
  const auto n = static_cast<std::int64_t>(input.size());
  const std::int64_t out_len = (n * up_ + down_ / 2) / down_;
  std::vector<float> out(static_cast<std::size_t>(out_len));
  if (out_len == 0) return out;

  // Zero-padded copy so the inner loop needs no bounds checks.
  const std::int64_t pad = half_width_ + 1;
  std::vector<double> padded(static_cast<std::size_t>(n + 2 * pad), 0.0);
  std::copy(input.begin(), input.end(), padded.begin() + pad);

  const bool exact = up_ <= kMaxExactPhases;
  std::vector<double> scratch(exact ? 0 : static_cast<std::size_t>(taps_));
  for (std::int64_t k = 0; k < out_len; ++k) {
    const std::int64_t pos = k * down_;
    const std::int64_t base = pos / up_;
    const std::int64_t phase = pos % up_;
    const double* coeffs;
    if (exact) {
      coeffs = table_.data() + phase * taps_;
    } else {
      const double grid = static_cast<double>(phase) * kGridPhases / up_;
      const auto row = static_cast<std::int64_t>(grid);
      const double t = grid - static_cast<double>(row);
      const double* a = table_.data() + row * taps_;
      const double* b = a + taps_;
      for (int idx = 0; idx < taps_; ++idx) scratch[idx] = a[idx] + t * (b[idx] - a[idx]);
      coeffs = scratch.data();
    }
    // padded index of input sample (base - half_width + idx) is base + 1 + idx.
    const double* x = padded.data() + base + pad - half_width_;
    double acc0 = 0.0, acc1 = 0.0;
    int idx = 0;
    for (; idx + 1 < taps_; idx += 2) {
      acc0 += coeffs[idx] * x[idx];
      acc1 += coeffs[idx + 1] * x[idx + 1];
    }
    if (idx < taps_) acc0 += coeffs[idx] * x[idx];
    out[static_cast<std::size_t>(k)] = static_cast<float>(acc0 + acc1);
  }
  return out;
}

std::vector<float> resample(std::span<const float> samples, int from_hz,
                            int to_hz) {
  return Resampler(from_hz, to_hz).process(samples);
}

}  // namespace wildcut
