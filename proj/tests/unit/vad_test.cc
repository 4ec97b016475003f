#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wildcut/error.h"
#include "wildcut/vad.h"

using namespace wildcut;

namespace {

constexpr int kRate = 16000;

// Speech-like bursts (harmonic tone) over a faint noise floor.
std::vector<float> bursts(const std::vector<std::pair<double, double>>& on, double total_s) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> s(static_cast<std::size_t>(total_s * kRate));
  for (auto& v : s) v = 1e-4f * u(rng);
  for (const auto& [a, b] : on) {
    for (auto i = static_cast<std::size_t>(a * kRate); i < static_cast<std::size_t>(b * kRate); ++i) {
      const double t = static_cast<double>(i) / kRate;
      s[i] += static_cast<float>(0.3 * std::sin(2 * std::numbers::pi * 180 * t) +
                                 0.1 * std::sin(2 * std::numbers::pi * 360 * t));
    }
  }
  return s;
}

}  // namespace

TEST(Vad, TwoRegionFixtureWithinTolerance) {
  const auto s = bursts({{0.0, 2.0}, {3.0, 5.0}}, 5.0);
  const auto regions = reference_vad(s, kRate, VadParams{});
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_NEAR(regions[0].start_s, 0.0, 0.2);
  EXPECT_NEAR(regions[0].end_s, 2.0, 0.2);
  EXPECT_NEAR(regions[1].start_s, 3.0, 0.2);
  EXPECT_NEAR(regions[1].end_s, 5.0, 0.2);
}

TEST(Vad, ShortGapIsBridged) {
  // A 0.1 s pause is shorter than min_silence_s.
  const auto s = bursts({{0.5, 1.5}, {1.6, 2.5}}, 3.0);
  const auto regions = reference_vad(s, kRate, VadParams{});
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_NEAR(regions[0].start_s, 0.5, 0.2);
  EXPECT_NEAR(regions[0].end_s, 2.5, 0.2);
}

TEST(Vad, ShortBlipIsDiscarded) {
  const auto s = bursts({{1.0, 1.1}, {2.0, 3.5}}, 4.0);
  const auto regions = reference_vad(s, kRate, VadParams{});
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_NEAR(regions[0].start_s, 2.0, 0.2);
}

TEST(Vad, OutputSortedDisjointAndInsideSignal) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, double>> on;
    double t = std::uniform_real_distribution<double>(0, 0.5)(rng);
    while (t < 9.0) {
      const double len = std::uniform_real_distribution<double>(0.05, 1.5)(rng);
      on.push_back({t, std::min(10.0, t + len)});
      t += len + std::uniform_real_distribution<double>(0.05, 1.5)(rng);
    }
    const auto regions = reference_vad(bursts(on, 10.0), kRate, VadParams{});
    for (std::size_t i = 0; i < regions.size(); ++i) {
      EXPECT_GE(regions[i].start_s, 0.0);
      EXPECT_LE(regions[i].end_s, 10.0 + 1e-9);
      EXPECT_LT(regions[i].start_s, regions[i].end_s);
      if (i > 0) {
        EXPECT_LT(regions[i - 1].end_s, regions[i].start_s);
      }
    }
  }
}

TEST(Vad, SilenceAndEmptyInput) {
  std::vector<float> zeros(kRate * 2, 0.0f);
  EXPECT_TRUE(reference_vad(zeros, kRate, VadParams{}).empty());
  EXPECT_TRUE(reference_vad(std::vector<float>{}, kRate, VadParams{}).empty());
}

TEST(Vad, OneLevelPerHop) {
  const auto s = bursts({{0.2, 0.6}}, 1.0);
  const auto levels = frame_levels_db(s, kRate, VadParams{});
  EXPECT_EQ(levels.size(), 100u);
  EXPECT_GT(levels[40], -35.0);
  EXPECT_LT(levels[90], -45.0);
}

TEST(Vad, ParamsValidated) {
  VadParams p;
  p.off_threshold_db = -30.0;  // above on
  EXPECT_THROW(validate(p), ConfigError);
  p = {};
  p.hop_ms = 0;
  EXPECT_THROW(validate(p), ConfigError);
  EXPECT_NO_THROW(validate(VadParams{}));
}
