#pragma once

#include <span>
#include <string>
#include <vector>

#include "wildcut/types.h"

namespace wildcut {

struct SegmentationParams {
  double max_segment_s = 30.0;
  double min_emit_s = 1.0;
  double max_join_gap_s = 2.0;
};

void validate(const SegmentationParams& params);

// Clips turns to [0, duration_s], drops empty ones, merges overlapping turns
// of the same speaker, and removes every region where two or more speakers
// are active from all the turns involved. Result is sorted by start and
// non-overlapping. Turns that merely touch are kept apart.
std::vector<SpeakerTurn> diarization_postprocess(std::vector<SpeakerTurn> turns,
                                                 double duration_s);

// Pairwise intersection of sorted, disjoint VAD regions with sorted,
// non-overlapping turns. Chunks shorter than min_chunk_s are dropped.
std::vector<VadChunk> intersect_with_turns(std::span<const TimeSpan> regions,
                                           std::span<const SpeakerTurn> turns,
                                           double min_chunk_s);

// A span closed by the greedy accumulator, before the min_emit_s check.
struct FlushedSpan {
  std::string speaker_label;
  double start_s = 0.0;
  double end_s = 0.0;
  bool emitted = false;  // false when shorter than min_emit_s
  std::vector<TimeSpan> chunks;  // member chunks, in order
};

struct SegmentationResult {
  std::vector<Segment> segments;   // emitted, ids not yet assigned
  std::vector<FlushedSpan> flushed;  // every flushed span, in order
};

// Greedy left-to-right concatenation of same-speaker chunks. A chunk joins
// the open segment iff it has the same speaker, the gap from the previous
// chunk is <= max_join_gap_s and the joined span stays <= max_segment_s.
// Chunks longer than max_segment_s are cut into max_segment_s pieces; the
// remainder stays open. Spans shorter than min_emit_s are not emitted.
// Input is sorted first, so the result does not depend on input order.
SegmentationResult segment_chunks(std::vector<VadChunk> chunks,
                                  const SegmentationParams& params);

// Sample range [round(start*sr), round(end*sr)). Throws ContractViolation
// when the segment falls outside the buffer.
std::span<const float> slice_audio(std::span<const float> samples,
                                   int sample_rate, double start_s,
                                   double end_s);

}  // namespace wildcut
