#pragma once

#include <span>
#include <vector>

#include "wildcut/types.h"

namespace wildcut {

// Energy-hysteresis detector settings. Thresholds are in dB relative to the
// RMS level of the whole signal.
struct VadParams {
  double frame_ms = 30.0;
  double hop_ms = 10.0;
  double on_threshold_db = -35.0;
  double off_threshold_db = -45.0;
  double min_speech_s = 0.25;
  double min_silence_s = 0.3;
  double speech_pad_s = 0.1;
};

// Throws ConfigError unless off < on and every duration is positive.
void validate(const VadParams& params);

// Frame level in dB relative to the whole-signal RMS, one value per hop.
// Frame i describes the hop cell [i*hop, (i+1)*hop) and measures energy over
// a frame_ms window centred on that cell, clipped to the signal.
std::vector<double> frame_levels_db(std::span<const float> samples,
                                    int sample_rate, const VadParams& params);

// Built-in reference detector. Enters speech when a frame rises above
// on_threshold_db and leaves once frames stay below off_threshold_db for at
// least min_silence_s. Regions shorter than min_speech_s are discarded, the
// rest are padded by speech_pad_s (clipped to the signal) and merged where
// pads collide. Output is sorted and disjoint.
std::vector<TimeSpan> reference_vad(std::span<const float> samples,
                                    int sample_rate, const VadParams& params);

}  // namespace wildcut
