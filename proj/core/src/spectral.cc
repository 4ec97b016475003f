#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "wildcut/backends.h"

namespace wildcut {
namespace {

constexpr int kFrame = 512;
constexpr double kPowerFloor = 1e-12;

struct FftwFree {
  void operator()(void* p) const { fftwf_free(p); }
};

// The planner is not thread safe; plans are created once and executed with
// the new-array interface on per-call buffers of the same alignment.
fftwf_plan shared_plan() {
  static std::once_flag once;
  static fftwf_plan plan = nullptr;
  std::call_once(once, [] {
    std::unique_ptr<float, FftwFree> in(fftwf_alloc_real(kFrame));
    std::unique_ptr<fftwf_complex, FftwFree> out(fftwf_alloc_complex(kFrame / 2 + 1));
    plan = fftwf_plan_dft_r2c_1d(kFrame, in.get(), out.get(), FFTW_ESTIMATE);
  });
  return plan;
}

const std::vector<float>& hann() {
  static const std::vector<float> window = [] {
    std::vector<float> w(kFrame);
    for (int i = 0; i < kFrame; ++i) {
      w[i] = static_cast<float>(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kFrame));
    }
    return w;
  }();
  return window;
}

}  // namespace

double spectral_flatness(std::span<const float> samples, int sample_rate) {
  const fftwf_plan plan = shared_plan();
  const auto& window = hann();
  std::unique_ptr<float, FftwFree> in(fftwf_alloc_real(kFrame));
  std::unique_ptr<fftwf_complex, FftwFree> out(fftwf_alloc_complex(kFrame / 2 + 1));

  // Only bins up to 8 kHz take part: upsampled material has an empty top
  // band that would otherwise pull the geometric mean to zero.
  const int kBins = std::clamp(static_cast<int>(8000.0 * kFrame / std::max(1, sample_rate)), 1, kFrame / 2 - 1);
  double flatness_sum = 0.0;
  std::size_t frames = 0;
  for (std::size_t start = 0; start < samples.size(); start += kFrame) {
    const std::size_t len = std::min<std::size_t>(kFrame, samples.size() - start);
    for (std::size_t i = 0; i < kFrame; ++i) {
      in.get()[i] = i < len ? samples[start + i] * window[i] : 0.0f;
    }
    fftwf_execute_dft_r2c(plan, in.get(), out.get());
    double log_sum = 0.0;
    double lin_sum = 0.0;
    for (int k = 1; k <= kBins; ++k) {
      const double re = out.get()[k][0];
      const double im = out.get()[k][1];
      const double power = re * re + im * im + kPowerFloor;
      log_sum += std::log(power);
      lin_sum += power;
    }
    const double arithmetic = lin_sum / kBins;
    if (arithmetic <= 2.0 * kPowerFloor) continue;  // silent frame
    flatness_sum += std::exp(log_sum / kBins) / arithmetic;
    ++frames;
  }
  return frames == 0 ? 1.0 : flatness_sum / static_cast<double>(frames);
}

double synthetic_quality_score(std::span<const float> samples, int sample_rate) {
  return std::clamp(1.0 + 4.0 * (1.0 - spectral_flatness(samples, sample_rate)), 1.0, 5.0);
}

}  // namespace wildcut
