#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.h"
#include "wildcut/error.h"
#include "wildcut/standardize.h"

using namespace wildcut;

namespace {

std::vector<float> sine(int rate, double seconds, double freq, double amp) {
  std::vector<float> s(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * freq * i / rate));
  }
  return s;
}

double rms_db_oracle(const std::vector<float>& s) {
  double acc = 0.0;
  for (float v : s) acc += static_cast<double>(v) * v;
  return 10.0 * std::log10(acc / s.size());
}

RawAudio mono(int rate, std::vector<float> s) {
  RawAudio r;
  r.sample_rate = rate;
  r.channels.push_back(std::move(s));
  return r;
}

}  // namespace

TEST(Resampler, OutputLengthIsRoundedRatio) {
  for (int rate : {8000, 16000, 22050, 44100, 48000}) {
    const Resampler r(rate, 24000);
    for (std::size_t n : {1u, 7u, 1000u, 44101u}) {
      std::vector<float> x(n, 0.0f);
      const auto expect = static_cast<std::size_t>(std::llround(n * 24000.0 / rate));
      EXPECT_EQ(r.process(x).size(), expect) << rate << " " << n;
    }
  }
}

TEST(Resampler, ReducesRatio) {
  const Resampler r(44100, 24000);
  EXPECT_EQ(r.up(), 80);
  EXPECT_EQ(r.down(), 147);
}

TEST(Resampler, EqualRatesCopy) {
  const auto x = sine(24000, 0.1, 440.0, 0.5);
  EXPECT_EQ(resample(x, 24000), x);
}

TEST(Resampler, SineTracksAnalyticAcrossRates) {
  for (int rate : {8000, 16000, 22050, 32000, 44100, 48000}) {
    const auto y = resample(sine(rate, 0.5, 1000.0, 0.8), rate);
    const auto trim = static_cast<std::size_t>(0.01 * 24000);
    double worst = 0.0;
    for (std::size_t i = trim; i + trim < y.size(); ++i) {
      const double want = 0.8 * std::sin(2.0 * std::numbers::pi * 1000.0 * i / 24000.0);
      worst = std::max(worst, std::abs(y[i] - want));
    }
    EXPECT_LT(worst, 1e-3) << "from " << rate;
  }
}

TEST(Resampler, AttenuatesAboveNewNyquist) {
  // 15 kHz cannot be represented at 24 kHz and must be suppressed.
  const auto y = resample(sine(48000, 0.5, 15000.0, 0.8), 48000);
  double peak = 0.0;
  for (std::size_t i = 480; i + 480 < y.size(); ++i) peak = std::max(peak, std::abs(static_cast<double>(y[i])));
  EXPECT_LT(peak, 1e-3);
}

TEST(Loudness, RmsOfSineAndSilence) {
  EXPECT_NEAR(measure_rms_dbfs(sine(24000, 1.0, 100.0, 1.0)), -3.0103, 1e-3);
  std::vector<float> zeros(100, 0.0f);
  EXPECT_EQ(measure_rms_dbfs(zeros), kSilenceFloorDbfs);
  EXPECT_THROW(measure_rms_dbfs(std::vector<float>{}), ContractViolation);
}

TEST(Loudness, GainIsClamped) {
  LoudnessParams p;
  EXPECT_DOUBLE_EQ(compute_gain_db(-21.0, p), 1.0);
  EXPECT_DOUBLE_EQ(compute_gain_db(-40.0, p), 3.0);
  EXPECT_DOUBLE_EQ(compute_gain_db(-5.0, p), -3.0);
  EXPECT_DOUBLE_EQ(compute_gain_db(-20.0, p), 0.0);
}

TEST(Loudness, ParamsValidated) {
  LoudnessParams p;
  p.gain_clamp_db = -1;
  EXPECT_THROW(validate(p), ConfigError);
  p = {};
  p.peak_ceiling = 1.5;
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(Standardize, MonoIsUnweightedMean) {
  RawAudio r;
  r.sample_rate = 24000;
  r.channels = {{1.0f, 0.0f, 0.5f}, {0.0f, 0.0f, -0.5f}};
  EXPECT_EQ(to_mono(r), (std::vector<float>{0.5f, 0.0f, 0.0f}));
}

TEST(Standardize, QuietInputGainsAtMostThreeDb) {
  const auto s = sine(16000, 2.0, 300.0, 0.01);  // about -43 dBFS
  const StandardizedAudio out = standardize(mono(16000, s), LoudnessParams{});
  EXPECT_EQ(out.sample_rate, 24000);
  EXPECT_DOUBLE_EQ(out.applied_gain_db, 3.0);
  EXPECT_FALSE(out.peak_guard_applied);
  EXPECT_NEAR(out.rms_dbfs - out.pre_gain_rms_dbfs, 3.0, 0.01);
  EXPECT_NEAR(out.rms_dbfs, rms_db_oracle(out.samples), 1e-6);
}

TEST(Standardize, PeakGuardKeepsSamplesInRange) {
  // A quiet signal with one spike: loudness wants +3 dB, the spike forbids it.
  auto s = sine(24000, 1.0, 200.0, 0.02);
  s[1000] = 0.99f;
  const StandardizedAudio out = standardize(mono(24000, s), LoudnessParams{});
  EXPECT_TRUE(out.peak_guard_applied);
  float peak = 0;
  for (float v : out.samples) peak = std::max(peak, std::abs(v));
  EXPECT_LE(peak, 0.999f + 1e-6f);
}

TEST(Standardize, SilenceStaysSilent) {
  const StandardizedAudio out = standardize(mono(8000, std::vector<float>(800, 0.0f)), LoudnessParams{});
  EXPECT_EQ(out.samples.size(), 2400u);
  for (float v : out.samples) EXPECT_EQ(v, 0.0f);
}

TEST(Standardize, FromFile) {
  fixtures::TempDir dir;
  fixtures::write_sine_wav(dir / "a.wav", 48000, 1.0, 440.0, 0.3);
  const StandardizedAudio out = standardize(dir / "a.wav", LoudnessParams{});
  EXPECT_EQ(out.samples.size(), 24000u);
  EXPECT_NEAR(out.duration_s(), 1.0, 1e-9);
}
