#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "wildcut/error.h"
#include "wildcut/segment.h"

using namespace wildcut;

TEST(Diarization, OverlapRemovedFromBothSpeakers) {
  const auto out = diarization_postprocess(
      {{"A", 0.0, 5.0}, {"B", 4.0, 9.0}}, 10.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (SpeakerTurn{"A", 0.0, 4.0}));
  EXPECT_EQ(out[1], (SpeakerTurn{"B", 5.0, 9.0}));
}

TEST(Diarization, SameSpeakerOverlapMerges) {
  const auto out = diarization_postprocess({{"A", 0.0, 3.0}, {"A", 2.0, 6.0}, {"A", 6.0, 7.0}}, 10.0);
  ASSERT_EQ(out.size(), 2u);  // touching turns stay apart
  EXPECT_EQ(out[0], (SpeakerTurn{"A", 0.0, 6.0}));
  EXPECT_EQ(out[1], (SpeakerTurn{"A", 6.0, 7.0}));
}

TEST(Diarization, ClipsAndDropsEmpty) {
  const auto out = diarization_postprocess({{"A", -1.0, 2.0}, {"B", 9.0, 12.0}, {"C", 3.0, 3.0}}, 10.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (SpeakerTurn{"A", 0.0, 2.0}));
  EXPECT_EQ(out[1], (SpeakerTurn{"B", 9.0, 10.0}));
}

TEST(Diarization, ContainedTurnSplitsTheOuter) {
  const auto out = diarization_postprocess({{"A", 0.0, 10.0}, {"B", 4.0, 6.0}}, 10.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (SpeakerTurn{"A", 0.0, 4.0}));
  EXPECT_EQ(out[1], (SpeakerTurn{"A", 6.0, 10.0}));
}

TEST(Intersect, ChunksCarrySpeakerAndRespectMinimum) {
  const std::vector<TimeSpan> regions{{0.0, 3.0}, {5.0, 8.0}};
  const std::vector<SpeakerTurn> turns{{"A", 1.0, 6.0}, {"B", 7.95, 9.0}};
  const auto chunks = intersect_with_turns(regions, turns, 0.1);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0], (VadChunk{1.0, 3.0, "A"}));
  EXPECT_EQ(chunks[1], (VadChunk{5.0, 6.0, "A"}));
}

TEST(Segmentation, JoinsWithinGapAndSpan) {
  SegmentationParams p;
  const auto r = segment_chunks({{0.0, 5.0, "A"}, {6.5, 10.0, "A"}, {12.5, 14.0, "A"}}, p);
  ASSERT_EQ(r.segments.size(), 2u);
  EXPECT_DOUBLE_EQ(r.segments[0].start_s, 0.0);
  EXPECT_DOUBLE_EQ(r.segments[0].end_s, 10.0);
  EXPECT_DOUBLE_EQ(r.segments[1].start_s, 12.5);
}

TEST(Segmentation, GapOfExactlyTwoJoins) {
  const auto r = segment_chunks({{0.0, 2.0, "A"}, {4.0, 6.0, "A"}}, SegmentationParams{});
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_DOUBLE_EQ(r.segments[0].end_s, 6.0);
}

TEST(Segmentation, SpeakerChangeCloses) {
  const auto r = segment_chunks({{0.0, 2.0, "A"}, {2.1, 4.0, "B"}, {4.1, 6.0, "A"}}, SegmentationParams{});
  ASSERT_EQ(r.segments.size(), 3u);
  EXPECT_EQ(r.segments[1].speaker_label, "B");
}

TEST(Segmentation, SpanLimitCloses) {
  const auto r = segment_chunks({{0.0, 20.0, "A"}, {21.0, 31.0, "A"}}, SegmentationParams{});
  ASSERT_EQ(r.segments.size(), 2u);
  EXPECT_DOUBLE_EQ(r.segments[0].end_s, 20.0);
}

TEST(Segmentation, LongChunkIsCut) {
  const auto r = segment_chunks({{0.0, 70.0, "A"}}, SegmentationParams{});
  ASSERT_EQ(r.segments.size(), 3u);
  EXPECT_DOUBLE_EQ(r.segments[0].duration_s(), 30.0);
  EXPECT_DOUBLE_EQ(r.segments[1].duration_s(), 30.0);
  EXPECT_DOUBLE_EQ(r.segments[2].duration_s(), 10.0);
}

TEST(Segmentation, ShortSpanFlushedButNotEmitted) {
  const auto r = segment_chunks({{0.0, 0.5, "A"}, {10.0, 12.0, "A"}}, SegmentationParams{});
  ASSERT_EQ(r.flushed.size(), 2u);
  EXPECT_FALSE(r.flushed[0].emitted);
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_DOUBLE_EQ(r.segments[0].start_s, 10.0);
}

TEST(Segmentation, IndependentOfInputOrder) {
  std::mt19937 rng(9);
  std::vector<VadChunk> chunks;
  double t = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double len = std::uniform_real_distribution<double>(0.2, 12.0)(rng);
    chunks.push_back({t, t + len, rng() % 2 ? "A" : "B"});
    t += len + std::uniform_real_distribution<double>(0.0, 3.0)(rng);
  }
  const auto base = segment_chunks(chunks, SegmentationParams{}).segments;
  std::shuffle(chunks.begin(), chunks.end(), rng);
  EXPECT_EQ(segment_chunks(chunks, SegmentationParams{}).segments, base);
}

TEST(Segmentation, ParamsValidated) {
  SegmentationParams p;
  p.min_emit_s = 40.0;
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(Slice, UsesRoundedSampleBounds) {
  std::vector<float> s(24000);
  const auto v = slice_audio(s, 24000, 0.25, 0.5);
  EXPECT_EQ(v.size(), 6000u);
  EXPECT_EQ(v.data(), s.data() + 6000);
  EXPECT_THROW(slice_audio(s, 24000, 0.5, 1.5), ContractViolation);
}
