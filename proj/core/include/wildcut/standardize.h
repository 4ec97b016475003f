#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wildcut/audio_io.h"
#include "wildcut/types.h"

namespace wildcut {

struct LoudnessParams {
  double target_dbfs = -20.0;
  double gain_clamp_db = 3.0;
  double peak_ceiling = 0.999;
};

// Throws ConfigError when gain_clamp_db < 0 or peak_ceiling is outside (0, 1].
void validate(const LoudnessParams& params);

// Mono, 24 kHz audio ready for every downstream stage.
struct StandardizedAudio {
  std::string source_id;
  std::vector<float> samples;
  int sample_rate = kStandardSampleRate;
  double rms_dbfs = 0.0;           // measured after gain and peak guard
  double pre_gain_rms_dbfs = 0.0;  // measured on the resampled mono signal
  double applied_gain_db = 0.0;    // clamped loudness gain, in [-clamp, clamp]
  bool peak_guard_applied = false;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Unweighted per-sample mean across channels.
std::vector<float> to_mono(const RawAudio& raw);

// Rational-ratio windowed-sinc resampler (Kaiser window, >= 90 dB stopband).
// Coefficients are tabulated per phase when the interpolation factor is
// small; otherwise they are evaluated on the fly.
class Resampler {
 public:
  Resampler(int from_hz, int to_hz);

  // Output length is round(n * to / from). Equal rates copy the input.
  std::vector<float> process(std::span<const float> input) const;

  std::int64_t up() const { return up_; }
  std::int64_t down() const { return down_; }
  // One-sided support of the interpolation kernel in input samples.
  int half_width() const { return half_width_; }

 private:
  double kernel(double x) const;

  std::int64_t up_ = 1;
  std::int64_t down_ = 1;
  double cutoff_ = 1.0;  // relative to the input Nyquist frequency
  int half_width_ = 0;
  double beta_ = 0.0;
  double i0_beta_ = 1.0;
  // table_[phase * taps + k] for phase in [0, up_), when tabulated.
  std::vector<double> table_;
  int taps_ = 0;
};

std::vector<float> resample(std::span<const float> samples, int from_hz,
                            int to_hz = kStandardSampleRate);

// Floor value reported for digital silence.
inline constexpr double kSilenceFloorDbfs = -100.0;

// 20 log10 of the RMS; kSilenceFloorDbfs for all-zero input. Throws
// ContractViolation on empty input.
double measure_rms_dbfs(std::span<const float> samples);

// clamp(target - current, -clamp, +clamp)
double compute_gain_db(double current_dbfs, const LoudnessParams& params);

// decode -> mono -> 24 kHz -> clamped gain -> peak guard.
StandardizedAudio standardize(const RawAudio& raw, const LoudnessParams& params);
StandardizedAudio standardize(const std::filesystem::path& path,
                              const LoudnessParams& params);

}  // namespace wildcut
