#include <gtest/gtest.h>

#include "wildcut/error.h"
#include "wildcut/source_id.h"
#include "wildcut/types.h"

using namespace wildcut;

TEST(SourceStatus, AdvancesOnlyToSuccessor) {
  AudioSource s;
  s.advance(SourceStatus::kStandardized);
  s.advance(SourceStatus::kSeparated);
  EXPECT_EQ(s.status, SourceStatus::kSeparated);
  EXPECT_THROW(s.advance(SourceStatus::kTranscribed), ContractViolation);
  EXPECT_THROW(s.advance(SourceStatus::kSeparated), ContractViolation);
}

TEST(SourceStatus, FailFromAnyState) {
  AudioSource s;
  s.advance(SourceStatus::kStandardized);
  s.fail("decode_error");
  EXPECT_EQ(s.status, SourceStatus::kFailed);
  EXPECT_EQ(s.failure_reason, "decode_error");
  EXPECT_EQ(to_string(SourceStatus::kDone), "done");
}

TEST(DropReason, NamesRoundTrip) {
  for (DropReason r : kAllDropReasons) {
    const auto back = drop_reason_from_string(to_string(r));
    ASSERT_TRUE(back.has_value()) << to_string(r);
    EXPECT_EQ(*back, r);
  }
  EXPECT_EQ(to_string(DropReason::kCharDurOutlier), "char_dur_outlier");
  EXPECT_FALSE(drop_reason_from_string("nope").has_value());
}

TEST(SegmentId, ZeroPaddedToFiveDigits) {
  EXPECT_EQ(make_segment_id("abc", 0), "abc_00000");
  EXPECT_EQ(make_segment_id("abc", 42), "abc_00042");
  EXPECT_EQ(make_segment_id("abc", 123456), "abc_123456");
}

// Expected digests computed with Python's hashlib.blake2b(digest_size=16).
TEST(SourceId, Blake2b128Vectors) {
  EXPECT_EQ(hash128_hex(""), "cae66941d9efbd404e4d88758ea67670");
  EXPECT_EQ(hash128_hex("abc"), "cf4ab791c62b8d2b2109c90275287816");
}

TEST(SourceId, DependsOnRelativePathOnly) {
  const auto a = make_source_id("/data/corpus/talks/a.wav", "/data/corpus");
  const auto b = make_source_id("/mnt/elsewhere/talks/a.wav", "/mnt/elsewhere");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, "c800f2c6315f10ee96ecce3eb2b2881e");
  EXPECT_NE(a, make_source_id("/data/corpus/talks/b.wav", "/data/corpus"));
  EXPECT_EQ(a.size(), 32u);
}
