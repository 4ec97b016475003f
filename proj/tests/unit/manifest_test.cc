#include <gtest/gtest.h>

#include "fixtures.h"
#include "wildcut/error.h"
#include "wildcut/manifest.h"

using namespace wildcut;

namespace {

SegmentRecord sample() {
  SegmentRecord r;
  r.segment_id = "abc_00003";
  r.wav_path = "wav/abc/abc_00003.wav";
  r.text = "hello \"world\"";
  r.language = "en";
  r.lang_confidence = 0.9;
  r.speaker_label = "spk1";
  r.duration_s = 4.8;
  r.dnsmos_ovrl = 3.25;
  r.avg_char_dur_s = 4.8 / 12.0;
  r.source_id = "abc";
  return r;
}

}  // namespace

TEST(Manifest, FixedKeyOrderAndSixDecimals) {
  EXPECT_EQ(encode_record(sample()),
            R"({"segment_id":"abc_00003","wav_path":"wav/abc/abc_00003.wav","text":"hello \"world\"",)"
            R"("language":"en","lang_confidence":0.900000,"speaker_label":"spk1","duration_s":4.800000,)"
            R"("dnsmos_ovrl":3.250000,"avg_char_dur_s":0.400000,"source_id":"abc"})");
}

TEST(Manifest, NegativeZeroPrintsAsZero) {
  EXPECT_EQ(format_fixed6(-0.0), "0.000000");
  EXPECT_EQ(format_fixed6(-1e-9), "0.000000");
  EXPECT_EQ(format_fixed6(1.5), "1.500000");
}

TEST(Manifest, RoundTripIsByteStable) {
  const std::string line = encode_record(sample());
  const SegmentRecord back = decode_record(line);
  EXPECT_EQ(encode_record(back), line);
  EXPECT_EQ(back.text, "hello \"world\"");
}

TEST(Manifest, MalformedJsonReportsOffset) {
  try {
    decode_record(R"({"segment_id": "x",)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.byte_offset(), 0u);
  }
}

TEST(Manifest, ValidationNamesTheField) {
  auto expect_field = [](SegmentRecord r, const std::string& field) {
    try {
      validate_record(r);
      FAIL() << "expected ValidationError for " << field;
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.field(), field);
    }
  };
  SegmentRecord r = sample();
  r.lang_confidence = 1.2;
  expect_field(r, "lang_confidence");
  r = sample();
  r.text = "   ";
  expect_field(r, "text");
  r = sample();
  r.duration_s = 31.0;
  r.avg_char_dur_s = 31.0 / 12.0;
  expect_field(r, "duration_s");
  r = sample();
  r.avg_char_dur_s = 0.5;
  expect_field(r, "avg_char_dur_s");
  r = sample();
  r.dnsmos_ovrl = 5.5;
  expect_field(r, "dnsmos_ovrl");
}

TEST(Manifest, UnknownKeyRejected) {
  std::string line = encode_record(sample());
  line.insert(line.size() - 1, R"(,"extra":1)");
  EXPECT_THROW(decode_record(line), ValidationError);
}

TEST(Manifest, DropRoundTrip) {
  const DropRecord d{"abc_00001", "abc", "filter", DropReason::kTooShort, 2.5, ""};
  EXPECT_EQ(decode_drop(encode_drop(d)), d);
}

TEST(Manifest, ValidateFileReportsLines) {
  fixtures::TempDir dir;
  const auto path = dir / "manifest.jsonl";
  fixtures::write_file(path, encode_record(sample()) + "\n\n{broken\n");
  const ManifestSummary s = validate_manifest(path);
  EXPECT_EQ(s.records, 1u);
  ASSERT_EQ(s.errors.size(), 2u);
  EXPECT_EQ(s.errors[0].line, 2u);
  EXPECT_EQ(s.errors[1].line, 3u);
  EXPECT_NEAR(s.total_duration_s, 4.8, 1e-9);
  EXPECT_THROW(validate_manifest(dir / "missing.jsonl"), IoError);
}

TEST(Manifest, AtomicWriteReplacesContent) {
  fixtures::TempDir dir;
  const auto path = dir / "out.jsonl";
  write_lines_atomic(path, {"a", "b"});
  write_lines_atomic(path, {"c"});
  EXPECT_EQ(read_lines(path), std::vector<std::string>{"c"});
}
