// Deterministic in-process backends. Each is a pure function of the audio it
// is handed and of sidecar files next to the audio or the original source:
//
//   <file>.turns.json     {"turns": [{"speaker","start_s","end_s"}, ...]}
//   <file>.vad.json       {"regions": [[start_s, end_s], ...]}
//   <file>.txt            transcript (optionally <file>.meta.json with
//                         {"language", "lang_confidence"})
//   <file>.mos            quality score
//   <source>.fixture.json {"turns", "regions", "language", "lang_confidence",
//                          "char_dur_s", "char_dur_jitter", "mos",
//                          "segments": [{"start_s","end_s","text","language",
//                                        "lang_confidence","mos"}]}
//
// Sidecar names append to the full file name ("a.wav.txt"); the form with the
// extension replaced ("a.txt") is accepted as well.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wildcut/audio_io.h"
#include "wildcut/backends.h"
#include "wildcut/error.h"
#include "wildcut/source_id.h"
#include "wildcut/standardize.h"

namespace wildcut {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<fs::path> find_sidecar(const fs::path& file, std::string_view suffix) {
  if (file.empty()) return std::nullopt;
  fs::path appended = file;
  appended += std::string(suffix);
  std::error_code ec;
  if (fs::is_regular_file(appended, ec)) return appended;
  fs::path replaced = file;
  replaced.replace_extension();
  replaced += std::string(suffix);
  if (replaced != appended && fs::is_regular_file(replaced, ec)) return replaced;
  return std::nullopt;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError(fmt::format("cannot read sidecar {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw StageError(fmt::format("malformed sidecar {}: {}", path.string(), e.what()));
  }
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Source-level fixture documents, parsed once per path.
class FixtureCache {
 public:
  const json* get(const fs::path& source) {
    if (source.empty()) return nullptr;
    std::lock_guard lock(mu_);
    auto it = cache_.find(source);
    if (it == cache_.end()) {
      std::optional<json> doc;
      if (auto p = find_sidecar(source, ".fixture.json")) doc = read_json(*p);
      it = cache_.emplace(source, std::move(doc)).first;
    }
    return it->second ? &*it->second : nullptr;
  }

 private:
  std::mutex mu_;
  std::map<fs::path, std::optional<json>> cache_;
};

FixtureCache& fixtures() {
  static FixtureCache cache;
  return cache;
}

std::vector<SpeakerTurn> parse_turns(const json& j, const std::string& where) {
  const json& arr = j.is_object() ? j.at("turns") : j;
  if (!arr.is_array()) throw StageError(where + ": turns must be an array");
  std::vector<SpeakerTurn> turns;
  for (const auto& t : arr) {
    turns.push_back({t.at("speaker").get<std::string>(), t.at("start_s").get<double>(),
                     t.at("end_s").get<double>()});
  }
  return turns;
}

std::vector<TimeSpan> parse_regions(const json& j, const std::string& where) {
  const json& arr = j.is_object() ? j.at("regions") : j;
  if (!arr.is_array()) throw StageError(where + ": regions must be an array");
  std::vector<TimeSpan> regions;
  for (const auto& r : arr) regions.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  return regions;
}

// Fixture segment with the largest overlap with [start, end]; ties go to the
// earlier entry. Null when nothing overlaps.
const json* match_segment(const json* fixture, double start, double end) {
  if (!fixture || !fixture->contains("segments")) return nullptr;
  const json* best = nullptr;
  double best_overlap = 0.0;
  for (const auto& seg : fixture->at("segments")) {
    const double overlap = std::min(end, seg.at("end_s").get<double>()) -
                           std::max(start, seg.at("start_s").get<double>());
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = &seg;
    }
  }
  return best;
}

// Audio of the clip: the in-memory view if present, else the whole file.
std::vector<float> load_clip(const AudioRef& ref) {
  if (!ref.samples.empty()) return {ref.samples.begin(), ref.samples.end()};
  RawAudio raw = decode_audio(ref.audio);
  std::vector<float> mono = to_mono(raw);
  if (raw.sample_rate != kStandardSampleRate) mono = resample(mono, raw.sample_rate);
  return mono;
}

// Uniform [0, 1) from a digest of the clip's location. Uses only the file
// name so results do not depend on where the corpus lives.
double location_uniform(const AudioRef& ref, std::string_view salt) {
  const std::string key = fmt::format("{}|{}|{}", ref.source.filename().string(),
                                      std::llround(ref.start_s * 1000.0), salt);
  const std::string hex = hash128_hex(key).substr(0, 13);  // 52 bits
  return static_cast<double>(std::stoull(hex, nullptr, 16)) / static_cast<double>(1ULL << 52);
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// `count` script-appropriate characters grouped into five-character words.
std::string synthetic_text(std::size_t count, const std::string& language, double seed) {
  char32_t base = U'a';
  std::uint32_t span = 26;
  if (language == "zh") {
    base = 0x4E00;
    span = 400;
  } else if (language == "ja") {
    base = 0x3042;
    span = 80;
  } else if (language == "ko") {
    base = 0xAC00;
    span = 400;
  }
  std::uint64_t state = static_cast<std::uint64_t>(seed * 9007199254740992.0) | 1;
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0 && i % 5 == 0) out += ' ';
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    append_utf8(out, base + static_cast<char32_t>(state % span));
  }
  return out;
}

class IdentitySeparator final : public Separator {
 public:
  fs::path separate(const AudioRef& input, const fs::path&) override { return input.audio; }
};

class MockDiarizer final : public Diarizer {
 public:
  explicit MockDiarizer(std::string flavor) : flavor_(std::move(flavor)) {}

  std::vector<SpeakerTurn> diarize(const AudioRef& vocals, double duration_s) override {
    if (flavor_ != "single") {
      for (const fs::path& file : {vocals.audio, vocals.source}) {
        if (auto p = find_sidecar(file, ".turns.json")) {
          return parse_turns(read_json(*p), p->string());
        }
      }
      if (const json* fx = fixtures().get(vocals.source); fx && fx->contains("turns")) {
        return parse_turns(fx->at("turns"), vocals.source.string());
      }
      if (flavor_ == "fixture") {
        throw StageError("no turns sidecar for " + vocals.source.string());
      }
    }
    return {{"spk0", 0.0, duration_s}};
  }

 private:
  std::string flavor_;
};

class MockVoiceDetector final : public VoiceDetector {
 public:
  MockVoiceDetector(std::string flavor, VadParams params)
      : flavor_(std::move(flavor)), params_(params) {}

  std::vector<TimeSpan> detect(const AudioRef& vocals) override {
    for (const fs::path& file : {vocals.audio, vocals.source}) {
      if (auto p = find_sidecar(file, ".vad.json")) {
        return parse_regions(read_json(*p), p->string());
      }
    }
    if (const json* fx = fixtures().get(vocals.source); fx && fx->contains("regions")) {
      return parse_regions(fx->at("regions"), vocals.source.string());
    }
    if (flavor_ == "fixture") throw StageError("no vad sidecar for " + vocals.source.string());
    if (!vocals.samples.empty()) {
      return reference_vad(vocals.samples, vocals.sample_rate, params_);
    }
    const std::vector<float> clip = load_clip(vocals);
    return reference_vad(clip, kStandardSampleRate, params_);
  }

 private:
  std::string flavor_;
  VadParams params_;
};

class ReferenceVoiceDetector final : public VoiceDetector {
 public:
  explicit ReferenceVoiceDetector(VadParams params) : params_(params) {}
  std::vector<TimeSpan> detect(const AudioRef& vocals) override {
    if (!vocals.samples.empty()) {
      return reference_vad(vocals.samples, vocals.sample_rate, params_);
    }
    const std::vector<float> clip = load_clip(vocals);
    return reference_vad(clip, kStandardSampleRate, params_);
  }

 private:
  VadParams params_;
};

class MockTranscriber final : public Transcriber {
 public:
  MockTranscriber(std::string flavor, int batch_size)
      : flavor_(std::move(flavor)), batch_size_(batch_size) {}

  std::vector<ItemResult<AsrResult>> transcribe_batch(
      std::span<const AudioRef> refs, const std::optional<std::string>& hint) override {
    std::vector<ItemResult<AsrResult>> out;
    out.reserve(refs.size());
    for (const auto& ref : refs) {
      ItemResult<AsrResult> item;
      try {
        item.value = transcribe(ref, hint);
      } catch (const Error& e) {
        item.error = e.what();
      }
      out.push_back(std::move(item));
    }
    return out;
  }

  int batch_size() const override { return batch_size_; }

 private:
  AsrResult transcribe(const AudioRef& ref, const std::optional<std::string>& hint) const {
    const std::string default_language = hint.value_or("en");
    if (auto p = find_sidecar(ref.audio, ".txt")) {
      AsrResult r{trim(read_text(*p)), default_language, 1.0};
      if (auto meta = find_sidecar(ref.audio, ".meta.json")) {
        const json m = read_json(*meta);
        r.language = m.value("language", r.language);
        r.lang_confidence = m.value("lang_confidence", r.lang_confidence);
      }
      return r;
    }
    const json* fx = fixtures().get(ref.source);
    if (const json* seg = match_segment(fx, ref.start_s, ref.end_s); seg && seg->contains("text")) {
      return {seg->at("text").get<std::string>(),
              seg->value("language", fx->value("language", default_language)),
              seg->value("lang_confidence", fx->value("lang_confidence", 1.0))};
    }
    if (flavor_ == "fixture") throw StageError("no transcript sidecar for " + ref.audio.string());

    const std::string language = fx ? fx->value("language", default_language) : default_language;
    const double confidence = fx ? fx->value("lang_confidence", 0.99) : 0.99;
    const double char_dur = fx ? fx->value("char_dur_s", 0.08) : 0.08;
    const double jitter = fx ? fx->value("char_dur_jitter", 0.2) : 0.2;
    const double u = location_uniform(ref, "asr");
    const double effective = char_dur * (1.0 + jitter * (u - 0.5));
    const double duration = std::max(0.0, ref.end_s - ref.start_s);
    const auto count = static_cast<std::size_t>(std::max<long long>(1, std::llround(duration / effective)));
    return {synthetic_text(count, language, u), language, confidence};
  }

  std::string flavor_;
  int batch_size_;
};

class MockQualityScorer final : public QualityScorer {
 public:
  explicit MockQualityScorer(std::string flavor) : flavor_(std::move(flavor)) {}

  double score(const AudioRef& clip) override {
    if (flavor_ != "synthetic") {
      if (auto p = find_sidecar(clip.audio, ".mos")) {
        try {
          return std::stod(read_text(*p));
        } catch (const std::logic_error&) {
          throw StageError("malformed score sidecar " + p->string());
        }
      }
      const json* fx = fixtures().get(clip.source);
      if (const json* seg = match_segment(fx, clip.start_s, clip.end_s); seg && seg->contains("mos")) {
        return seg->at("mos").get<double>();
      }
      if (fx && fx->contains("mos")) return fx->at("mos").get<double>();
      if (flavor_ == "fixture") throw StageError("no score sidecar for " + clip.audio.string());
    }
    if (!clip.samples.empty()) return synthetic_quality_score(clip.samples, clip.sample_rate);
    return synthetic_quality_score(load_clip(clip));
  }

 private:
  std::string flavor_;
};

}  // namespace

std::unique_ptr<Separator> make_mock_separator(const BackendDescriptor&) {
  return std::make_unique<IdentitySeparator>();
}

std::unique_ptr<Diarizer> make_mock_diarizer(const BackendDescriptor& desc) {
  return std::make_unique<MockDiarizer>(desc.flavor);
}

std::unique_ptr<VoiceDetector> make_mock_vad(const BackendDescriptor& desc,
                                             const VadParams& params) {
  return std::make_unique<MockVoiceDetector>(desc.flavor, params);
}

std::unique_ptr<VoiceDetector> make_reference_vad(const VadParams& params) {
  return std::make_unique<ReferenceVoiceDetector>(params);
}

std::unique_ptr<Transcriber> make_mock_transcriber(const BackendDescriptor& desc) {
  return std::make_unique<MockTranscriber>(desc.flavor, desc.batch_size);
}

std::unique_ptr<QualityScorer> make_mock_quality(const BackendDescriptor& desc) {
  return std::make_unique<MockQualityScorer>(desc.flavor);
}

}  // namespace wildcut
