#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "wildcut/stats.h"

using namespace wildcut;

TEST(Stats, PopulationStd) {
  const std::vector<double> d{2, 4, 4, 4, 5, 5, 7, 9};
  const StatsBlock b = compute_stats(d, d, 1.0);
  EXPECT_DOUBLE_EQ(b.duration.mean, 5.0);
  EXPECT_DOUBLE_EQ(b.duration.std, 2.0);  // sample std would be 2.138
  EXPECT_DOUBLE_EQ(b.duration.min, 2.0);
  EXPECT_DOUBLE_EQ(b.duration.max, 9.0);
  EXPECT_EQ(b.count, 8u);
  EXPECT_NEAR(b.total_duration_h, 40.0 / 3600.0, 1e-15);
}

TEST(Stats, EmptyAndZeroRaw) {
  const StatsBlock b = compute_stats({}, {}, 0.0);
  EXPECT_EQ(b.count, 0u);
  EXPECT_EQ(b.duration.mean, 0.0);
  EXPECT_EQ(b.retention_pct, 0.0);
}

TEST(Stats, MeanBetweenMinAndMax) {
  std::mt19937 rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + rng() % 50, std::uniform_real_distribution<double>(0.1, 30)(rng));
    const StatsBlock b = compute_stats(v, v, 1.0);
    EXPECT_LE(b.duration.min, b.duration.mean);
    EXPECT_LE(b.duration.mean, b.duration.max);
    EXPECT_GE(b.duration.std, 0.0);
  }
}

TEST(Stats, RetentionPercentages) {
  const std::vector<double> raw{36000.0};
  const std::vector<double> unfiltered{20469.6};
  const StatsBlock r = compute_stats(raw, {}, 10.0);
  const StatsBlock u = compute_stats(unfiltered, {}, r.total_duration_h);
  EXPECT_DOUBLE_EQ(r.retention_pct, 100.0);
  EXPECT_EQ(fmt::format("{:.2f}", u.retention_pct), "56.86");
}

TEST(Throughput, PaperArithmetic) {
  const auto tp = throughput_h_per_min(598.87, 3.99 * 3600.0);
  ASSERT_TRUE(tp.has_value());
  EXPECT_EQ(fmt::format("{:.2f}", *tp), "2.50");
  EXPECT_FALSE(throughput_h_per_min(1.0, 0.0).has_value());
}

TEST(Report, AllDropReasonsPresentAndJsonRoundTrip) {
  const std::vector<DropRecord> drops{{"a_00000", "a", "filter", DropReason::kTooShort, 1.5, ""},
                                      {"a_00001", "a", "filter", DropReason::kTooShort, 2.0, ""}};
  const std::vector<double> d{3.0, 4.0};
  const StatsBlock b = compute_stats(d, d, 1.0);
  const RunReport r = build_report(b, b, b, {{"en", 0.5}}, drops, 12.0, {{"asr", 1.0}});
  EXPECT_EQ(r.drop_counts.size(), 8u);
  EXPECT_EQ(r.drop_counts.at("too_short"), 2u);
  EXPECT_EQ(r.drop_counts.at("decode_error"), 0u);

  const auto j = report_to_json(r);
  EXPECT_EQ(j.at("std_kind"), "population");
  const RunReport back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(report_to_json(back).dump(), j.dump());
}

TEST(Report, TableHasThreeRows) {
  const std::vector<double> d{3.0, 30.0};
  const StatsBlock b = compute_stats(d, d, 1.0);
  const std::string table = render_table(build_report(b, b, compute_stats({}, {}, 1.0), {}, {}, 0.0));
  EXPECT_NE(table.find("Raw "), std::string::npos);
  EXPECT_NE(table.find("Processed w/o Filtering"), std::string::npos);
  EXPECT_NE(table.find("\nProcessed "), std::string::npos);
  EXPECT_NE(table.find("DNSMOS P.835 OVRL"), std::string::npos);
  EXPECT_NE(table.find("Throughput: n/a"), std::string::npos);
}
