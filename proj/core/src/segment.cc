#include "wildcut/segment.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>

#include "wildcut/error.h"

namespace wildcut {
namespace {

// Subtracts the sorted disjoint `cuts` from `span`.
std::vector<TimeSpan> subtract(TimeSpan span, const std::vector<TimeSpan>& cuts) {
  std::vector<TimeSpan> out;
  double cursor = span.start_s;
  for (const auto& c : cuts) {
    if (c.end_s <= cursor) continue;
    if (c.start_s >= span.end_s) break;
    if (c.start_s > cursor) out.push_back({cursor, c.start_s});
    cursor = std::max(cursor, c.end_s);
    if (cursor >= span.end_s) break;
  }
  if (cursor < span.end_s) out.push_back({cursor, span.end_s});
  return out;
}

std::vector<TimeSpan> union_of(std::vector<TimeSpan> spans) {
  std::sort(spans.begin(), spans.end(),
            [](const TimeSpan& a, const TimeSpan& b) { return a.start_s < b.start_s; });
  std::vector<TimeSpan> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.start_s <= merged.back().end_s) {
      merged.back().end_s = std::max(merged.back().end_s, s.end_s);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

// Largest end <= start + max_len, so that end - start never exceeds max_len
// after rounding.
double capped_end(double start, double max_len) {
  double end = start + max_len;
  while (end - start > max_len) end = std::nextafter(end, start);
  return end;
}

}  // namespace

void validate(const SegmentationParams& p) {
  if (!(p.min_emit_s > 0.0)) throw ConfigError("segmentation.min_emit_s must be > 0");
  if (!(p.max_segment_s > p.min_emit_s)) {
    throw ConfigError("segmentation.max_segment_s must exceed min_emit_s");
  }
  if (!(p.max_join_gap_s >= 0.0)) {
    throw ConfigError("segmentation.max_join_gap_s must be >= 0");
  }
}

std::vector<SpeakerTurn> diarization_postprocess(std::vector<SpeakerTurn> turns,
                                                 double duration_s) {
  // Per speaker: clip, drop empty, merge strictly overlapping turns.
  std::map<std::string, std::vector<SpeakerTurn>> by_speaker;
  for (auto& t : turns) {
    t.start_s = std::max(0.0, t.start_s);
    t.end_s = std::min(duration_s, t.end_s);
    if (t.end_s > t.start_s) by_speaker[t.speaker_label].push_back(t);
  }
  for (auto& [label, list] : by_speaker) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return std::tie(a.start_s, a.end_s) < std::tie(b.start_s, b.end_s);
    });
    std::vector<SpeakerTurn> merged;
    for (const auto& t : list) {
      if (!merged.empty() && t.start_s < merged.back().end_s) {
        merged.back().end_s = std::max(merged.back().end_s, t.end_s);
      } else {
        merged.push_back(t);
      }
    }
    list = std::move(merged);
  }

  std::vector<SpeakerTurn> out;
  for (const auto& [label, list] : by_speaker) {
    std::vector<TimeSpan> others;
    for (const auto& [other, other_list] : by_speaker) {
      if (other == label) continue;
      for (const auto& t : other_list) others.push_back({t.start_s, t.end_s});
    }
    const auto cuts = union_of(std::move(others));
    for (const auto& t : list) {
      for (const auto& piece : subtract({t.start_s, t.end_s}, cuts)) {
        out.push_back({label, piece.start_s, piece.end_s});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start_s, a.speaker_label) < std::tie(b.start_s, b.speaker_label);
  });
  return out;
}

std::vector<VadChunk> intersect_with_turns(std::span<const TimeSpan> regions,
                                           std::span<const SpeakerTurn> turns,
                                           double min_chunk_s) {
  std::vector<VadChunk> chunks;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < regions.size() && j < turns.size()) {
    const double lo = std::max(regions[i].start_s, turns[j].start_s);
    const double hi = std::min(regions[i].end_s, turns[j].end_s);
    if (hi > lo && hi - lo >= min_chunk_s) {
      chunks.push_back({lo, hi, turns[j].speaker_label});
    }
    if (regions[i].end_s < turns[j].end_s) {
      ++i;
    } else {
      ++j;
    }
  }
  return chunks;
}

SegmentationResult segment_chunks(std::vector<VadChunk> chunks,
                                  const SegmentationParams& params) {
  validate(params);
  std::sort(chunks.begin(), chunks.end(), [](const VadChunk& a, const VadChunk& b) {
    return std::tie(a.start_s, a.end_s, a.speaker_label) <
           std::tie(b.start_s, b.end_s, b.speaker_label);
  });

  SegmentationResult result;
  std::optional<FlushedSpan> open;
  auto flush = [&] {
    if (!open) return;
    open->emitted = open->end_s - open->start_s >= params.min_emit_s;
    if (open->emitted) {
      result.segments.push_back({"", open->speaker_label, open->start_s, open->end_s});
    }
    result.flushed.push_back(std::move(*open));
    open.reset();
  };

  for (const auto& c : chunks) {
    if (open && c.speaker_label == open->speaker_label &&
        c.start_s - open->end_s <= params.max_join_gap_s &&
        c.end_s - open->start_s <= params.max_segment_s) {
      open->end_s = std::max(open->end_s, c.end_s);
      open->chunks.push_back({c.start_s, c.end_s});
      continue;
    }
    flush();
    double start = c.start_s;
    while (c.end_s - start > params.max_segment_s) {
      const double end = capped_end(start, params.max_segment_s);
      open = FlushedSpan{c.speaker_label, start, end, false, {{start, end}}};
      flush();
      start = end;
    }
    open = FlushedSpan{c.speaker_label, start, c.end_s, false, {{start, c.end_s}}};
  }
  flush();
  return result;
}

std::span<const float> slice_audio(std::span<const float> samples,
                                   int sample_rate, double start_s,
                                   double end_s) {
  const auto n = static_cast<std::int64_t>(samples.size());
  const std::int64_t a = std::llround(start_s * sample_rate);
  const std::int64_t b = std::llround(end_s * sample_rate);
  if (a < 0 || b > n || a > b) {
    throw ContractViolation("slice_audio: segment outside audio bounds");
  }
  return samples.subspan(static_cast<std::size_t>(a), static_cast<std::size_t>(b - a));
}

}  // namespace wildcut
