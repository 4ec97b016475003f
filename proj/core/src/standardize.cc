#include "wildcut/standardize.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "wildcut/error.h"

namespace wildcut {

void validate(const LoudnessParams& params) {
  if (!(params.gain_clamp_db >= 0.0)) {
    throw ConfigError("loudness.gain_clamp_db must be >= 0");
  }
  if (!(params.peak_ceiling > 0.0 && params.peak_ceiling <= 1.0)) {
    throw ConfigError("loudness.peak_ceiling must be in (0, 1]");
  }
  if (!std::isfinite(params.target_dbfs) || params.target_dbfs > 0.0) {
    throw ConfigError("loudness.target_dbfs must be finite and <= 0");
  }
}

std::vector<float> to_mono(const RawAudio& raw) {
  if (raw.channels.empty()) throw ContractViolation("to_mono: no channels");
  if (raw.channels.size() == 1) return raw.channels.front();
  const std::size_t frames = raw.num_frames();
  for (const auto& ch : raw.channels) {
    if (ch.size() != frames) {
      throw ContractViolation("to_mono: channels differ in length");
    }
  }
  const double scale = 1.0 / static_cast<double>(raw.channels.size());
  std::vector<float> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (const auto& ch : raw.channels) sum += ch[i];
    mono[i] = static_cast<float>(sum * scale);
  }
  return mono;
}

double measure_rms_dbfs(std::span<const float> samples) {
  if (samples.empty()) throw ContractViolation("measure_rms_dbfs: empty input");
  double energy = 0.0;
  for (float x : samples) energy += static_cast<double>(x) * x;
  const double mean = energy / static_cast<double>(samples.size());
  if (mean <= 0.0) return kSilenceFloorDbfs;
  return 10.0 * std::log10(mean);
}

double compute_gain_db(double current_dbfs, const LoudnessParams& params) {
  if (!std::isfinite(current_dbfs)) {
    throw ContractViolation("compute_gain_db: level must be finite");
  }
  return std::clamp(params.target_dbfs - current_dbfs, -params.gain_clamp_db,
                    params.gain_clamp_db);
}

StandardizedAudio standardize(const RawAudio& raw, const LoudnessParams& params) {
  validate(params);
  if (raw.sample_rate <= 0) throw ContractViolation("standardize: bad sample rate");
  if (raw.num_frames() == 0) throw DecodeError("standardize: empty audio");

  StandardizedAudio out;
  out.sample_rate = kStandardSampleRate;
  out.samples = resample(to_mono(raw), raw.sample_rate, kStandardSampleRate);
  if (out.samples.empty()) throw DecodeError("standardize: audio shorter than one output sample");

  out.pre_gain_rms_dbfs = measure_rms_dbfs(out.samples);
  out.applied_gain_db = compute_gain_db(out.pre_gain_rms_dbfs, params);
  const auto gain = static_cast<float>(std::pow(10.0, out.applied_gain_db / 20.0));
  float peak = 0.0f;
  for (float& x : out.samples) {
    x *= gain;
    peak = std::max(peak, std::abs(x));
  }
  if (peak > params.peak_ceiling) {
    const auto scale = static_cast<float>(params.peak_ceiling / peak);
    for (float& x : out.samples) x *= scale;
    // Rounding of the product may leave a sample a hair above the ceiling.
    const auto ceiling = static_cast<float>(params.peak_ceiling);
    for (float& x : out.samples) x = std::clamp(x, -ceiling, ceiling);
    out.peak_guard_applied = true;
  }
  out.rms_dbfs = measure_rms_dbfs(out.samples);
  return out;
}

StandardizedAudio standardize(const std::filesystem::path& path,
                              const LoudnessParams& params) {
  return standardize(decode_audio(path), params);
}

}  // namespace wildcut
