#include "wildcut/manifest.h"

#include <fmt/format.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "wildcut/error.h"
#include "wildcut/text.h"

namespace wildcut {
namespace {

using nlohmann::json;

constexpr double kMaxSegmentSpan = 30.0 + 1e-6;

std::string quote(const std::string& s) {
  // nlohmann escapes control characters and quotes; UTF-8 passes through.
  return json(s).dump(-1, ' ', false, json::error_handler_t::strict);
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(key, "missing");
  return *it;
}

std::string get_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw ValidationError(key, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number()) throw ValidationError(key, "expected a number");
  return v.get<double>();
}

json parse_object(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(fmt::format("malformed JSON at byte {}: {}", offset,
                                 e.what()),
                     offset);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", 0);
  return j;
}

void require_non_empty(const std::string& value, const char* field) {
  if (value.empty()) throw ValidationError(field, "must not be empty");
}

}  // namespace

std::string format_fixed6(double value) {
  std::string s = fmt::format("{:.6f}", value);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string encode_record(const SegmentRecord& rec) {
  std::string out;
  out.reserve(256 + rec.text.size());
  out += "{\"segment_id\":" + quote(rec.segment_id);
  out += ",\"wav_path\":" + quote(rec.wav_path);
  out += ",\"text\":" + quote(rec.text);
  out += ",\"language\":" + quote(rec.language);
  out += ",\"lang_confidence\":" + format_fixed6(rec.lang_confidence);
  out += ",\"speaker_label\":" + quote(rec.speaker_label);
  out += ",\"duration_s\":" + format_fixed6(rec.duration_s);
  out += ",\"dnsmos_ovrl\":" + format_fixed6(rec.dnsmos_ovrl);
  out += ",\"avg_char_dur_s\":" + format_fixed6(rec.avg_char_dur_s);
  out += ",\"source_id\":" + quote(rec.source_id);
  out += '}';
  return out;
}

void validate_record(const SegmentRecord& rec) {
  require_non_empty(rec.segment_id, "segment_id");
  require_non_empty(rec.wav_path, "wav_path");
  require_non_empty(rec.language, "language");
  require_non_empty(rec.speaker_label, "speaker_label");
  require_non_empty(rec.source_id, "source_id");
  if (!is_valid_utf8(rec.text)) throw ValidationError("text", "invalid UTF-8");
  const std::size_t chars = count_non_whitespace(rec.text);
  if (chars == 0) throw ValidationError("text", "no non-whitespace characters");
  if (!(rec.lang_confidence >= 0.0 && rec.lang_confidence <= 1.0)) {
    throw ValidationError("lang_confidence", "must be in [0, 1]");
  }
  if (!std::isfinite(rec.duration_s) || rec.duration_s <= 0.0 ||
      rec.duration_s > kMaxSegmentSpan) {
    throw ValidationError("duration_s", "must be in (0, 30]");
  }
  if (!(rec.dnsmos_ovrl >= 0.0 && rec.dnsmos_ovrl <= 5.0)) {
    throw ValidationError("dnsmos_ovrl", "must be in [0, 5]");
  }
  if (!std::isfinite(rec.avg_char_dur_s) || rec.avg_char_dur_s <= 0.0) {
    throw ValidationError("avg_char_dur_s", "must be positive");
  }
  // Both values carry six decimals on disk, hence the slack.
  const double expected = rec.duration_s / static_cast<double>(chars);
  if (std::abs(expected - rec.avg_char_dur_s) > 2e-6) {
    throw ValidationError(
        "avg_char_dur_s",
        fmt::format("expected duration_s / chars = {:.6f}", expected));
  }
}

SegmentRecord decode_record(std::string_view line) {
  const json j = parse_object(line);
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto key : kRecordKeys) known = known || key == item.key();
    if (!known) throw ValidationError(item.key(), "unknown key");
  }
  SegmentRecord rec;
  rec.segment_id = get_string(j, "segment_id");
  rec.wav_path = get_string(j, "wav_path");
  rec.text = get_string(j, "text");
  rec.language = get_string(j, "language");
  rec.lang_confidence = get_number(j, "lang_confidence");
  rec.speaker_label = get_string(j, "speaker_label");
  rec.duration_s = get_number(j, "duration_s");
  rec.dnsmos_ovrl = get_number(j, "dnsmos_ovrl");
  rec.avg_char_dur_s = get_number(j, "avg_char_dur_s");
  rec.source_id = get_string(j, "source_id");
  validate_record(rec);
  return rec;
}

std::string encode_drop(const DropRecord& drop) {
  std::string out = "{\"id\":" + quote(drop.id);
  out += ",\"source_id\":" + quote(drop.source_id);
  out += ",\"stage\":" + quote(drop.stage);
  out += ",\"reason\":" + quote(std::string(to_string(drop.reason)));
  out += ",\"duration_s\":" + format_fixed6(drop.duration_s);
  out += ",\"detail\":" + quote(drop.detail);
  out += '}';
  return out;
}

DropRecord decode_drop(std::string_view line) {
  const json j = parse_object(line);
  DropRecord d;
  d.id = get_string(j, "id");
  d.source_id = get_string(j, "source_id");
  d.stage = get_string(j, "stage");
  const std::string reason = get_string(j, "reason");
  auto parsed = drop_reason_from_string(reason);
  if (!parsed) throw ValidationError("reason", "unknown reason " + reason);
  d.reason = *parsed;
  d.duration_s = get_number(j, "duration_s");
  if (!(d.duration_s >= 0.0)) {
    throw ValidationError("duration_s", "must be non-negative");
  }
  if (j.contains("detail")) d.detail = get_string(j, "detail");
  return d;
}

ManifestSummary validate_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  ManifestSummary summary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      SegmentRecord rec = decode_record(line);
      ++summary.records;
      summary.total_duration_s += rec.duration_s;
    } catch (const Error& e) {
      summary.errors.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return summary;
}

void write_lines_atomic(const std::filesystem::path& path,
                        const std::vector<std::string>& lines) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw IoError("cannot write " + tmp.string());
    for (const auto& l : lines) {
      std::fwrite(l.data(), 1, l.size(), f);
      std::fputc('\n', f);
    }
    std::fflush(f);
    ::fsync(::fileno(f));
    if (std::fclose(f) != 0) throw IoError("write failure on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return lines;
}

}  // namespace wildcut
