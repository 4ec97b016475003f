#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.h"
#include "wildcut/error.h"
#include "wildcut/filter.h"

using namespace wildcut;

namespace {

SegmentRecord rec(const std::string& id, const std::string& lang, double conf, double q, double dur,
                  std::size_t chars) {
  SegmentRecord r;
  r.segment_id = id;
  r.source_id = "src";
  r.language = lang;
  r.lang_confidence = conf;
  r.dnsmos_ovrl = q;
  r.duration_s = dur;
  r.text = std::string(chars, 'x');
  r.avg_char_dur_s = chars ? dur / static_cast<double>(chars) : 0.0;
  return r;
}

DropReason only_drop(const SegmentRecord& r, const FilterParams& p = {}) {
  const auto out = apply_filters({r}, p);
  EXPECT_TRUE(out.kept.empty());
  EXPECT_EQ(out.drops.size(), 1u);
  return out.drops.at(0).reason;
}

}  // namespace

TEST(Quantile, Type7KnownValues) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  const std::vector<double> one{7.5};
  EXPECT_DOUBLE_EQ(quantile(one, 0.3), 7.5);
  EXPECT_THROW(quantile(std::vector<double>{}, 0.5), ContractViolation);
  EXPECT_THROW(quantile(v, 1.5), ContractViolation);
}

TEST(Quantile, AgreesWithOracle) {
  std::mt19937 rng(1);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> v(1 + rng() % 40);
    for (auto& x : v) x = std::round(std::uniform_real_distribution<double>(0, 10)(rng) * 4) / 4;
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      EXPECT_DOUBLE_EQ(quantile(sorted, p), oracle::quantile7(v, p));
    }
  }
}

TEST(OutlierFlags, FenceIsStrict) {
  // Q1 = 1.75, Q3 = 3.25, IQR = 1.5, fences [-0.5, 5.5].
  EXPECT_EQ(char_dur_outlier_flags(std::vector<double>{1, 2, 3, 4, 5.5}, 1.5),
            (std::vector<bool>{false, false, false, false, false}));
  const auto flags = char_dur_outlier_flags(std::vector<double>{1, 2, 3, 4, 100}, 1.5);
  EXPECT_TRUE(flags[4]);
  EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 1);
}

TEST(OutlierFlags, SmallSamplesSkip) {
  EXPECT_EQ(char_dur_outlier_flags(std::vector<double>{0.1, 0.1, 9.0}, 1.5),
            (std::vector<bool>{false, false, false}));
  EXPECT_THROW(char_dur_outlier_flags(std::vector<double>{}, 1.5), ContractViolation);
  EXPECT_THROW(char_dur_outlier_flags(std::vector<double>{0.1, -1.0}, 1.5), ContractViolation);
}

TEST(Filter, CriteriaExamples) {
  EXPECT_EQ(only_drop(rec("a", "it", 0.95, 4.0, 5.0, 50)), DropReason::kNotTargetLanguage);
  EXPECT_EQ(only_drop(rec("a", "en", 0.79, 4.0, 5.0, 50)), DropReason::kLowLangConfidence);
  EXPECT_EQ(only_drop(rec("a", "en", 0.9, 3.0, 5.0, 50)), DropReason::kLowQualityScore);
  EXPECT_EQ(only_drop(rec("a", "en", 0.9, 4.0, 2.99, 50)), DropReason::kTooShort);
  EXPECT_EQ(only_drop(rec("a", "en", 0.9, 4.0, 5.0, 0)), DropReason::kEmptyTranscript);
  EXPECT_EQ(apply_filters({rec("a", "en", 0.80, 3.01, 3.0, 30)}, {}).kept.size(), 1u);
}

TEST(Filter, InclusiveQualityOption) {
  FilterParams p;
  p.quality_inclusive = true;
  EXPECT_EQ(apply_filters({rec("a", "en", 0.9, 3.0, 5.0, 50)}, p).kept.size(), 1u);
}

TEST(Filter, FirstFailingReasonWins) {
  EXPECT_EQ(only_drop(rec("a", "it", 0.1, 1.0, 1.0, 0)), DropReason::kNotTargetLanguage);
  EXPECT_EQ(only_drop(rec("a", "en", 0.9, 2.0, 1.0, 5)), DropReason::kLowQualityScore);
}

TEST(Filter, CharDurationOutlierWithinSource) {
  std::vector<SegmentRecord> rs;
  for (int i = 0; i < 6; ++i) rs.push_back(rec("s" + std::to_string(i), "en", 0.9, 4.0, 10.0, 100 + i));
  rs.push_back(rec("slow", "en", 0.9, 4.0, 10.0, 10));  // 1 s per character
  const auto out = apply_filters(rs, {});
  ASSERT_EQ(out.drops.size(), 1u);
  EXPECT_EQ(out.drops[0].id, "slow");
  EXPECT_EQ(out.drops[0].reason, DropReason::kCharDurOutlier);
  EXPECT_EQ(out.drops[0].stage, "filter");
  EXPECT_EQ(out.kept.size(), 6u);
}

TEST(Filter, SourceGranularityDropsWholeSource) {
  FilterParams p;
  p.language_granularity = DropGranularity::kSource;
  const auto out = apply_filters({rec("a", "en", 0.9, 4.0, 5.0, 50), rec("b", "fr", 0.5, 4.0, 5.0, 50)}, p);
  EXPECT_TRUE(out.kept.empty());
  ASSERT_EQ(out.drops.size(), 2u);
  EXPECT_EQ(out.drops[0].reason, DropReason::kLowLangConfidence);
}

TEST(Filter, PartitionPreservesOrderAndDuration) {
  std::mt19937 rng(2);
  std::vector<SegmentRecord> rs;
  double total = 0.0;
  for (int i = 0; i < 80; ++i) {
    const char* langs[] = {"en", "zh", "it", "ko"};
    auto r = rec("r" + std::to_string(i), langs[rng() % 4], std::uniform_real_distribution<double>(0.5, 1)(rng),
                 std::uniform_real_distribution<double>(1, 5)(rng), std::uniform_real_distribution<double>(1, 30)(rng),
                 rng() % 300);
    total += r.duration_s;
    rs.push_back(r);
  }
  const auto out = apply_filters(rs, {});
  EXPECT_EQ(out.kept.size() + out.drops.size(), rs.size());
  double sum = 0.0;
  for (const auto& k : out.kept) sum += k.duration_s;
  for (const auto& d : out.drops) sum += d.duration_s;
  EXPECT_NEAR(sum, total, 1e-9);
  for (std::size_t i = 1; i < out.kept.size(); ++i) {
    EXPECT_LT(std::stoi(out.kept[i - 1].segment_id.substr(1)), std::stoi(out.kept[i].segment_id.substr(1)));
  }
}

TEST(Filter, ParamsValidated) {
  FilterParams p;
  p.min_lang_confidence = 1.5;
  EXPECT_THROW(validate(p), ConfigError);
}
