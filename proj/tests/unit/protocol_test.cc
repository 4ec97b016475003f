#include <gtest/gtest.h>

#include "wildcut/error.h"
#include "wildcut/protocol.h"

using namespace wildcut;
using nlohmann::json;

TEST(Protocol, StageNames) {
  for (Stage s : kAllStages) EXPECT_EQ(stage_from_string(to_string(s)), s);
  EXPECT_FALSE(stage_from_string("standardize").has_value());
}

TEST(Protocol, EncodesEachMessageType) {
  Message hello{MessageType::kHello, 0, {}, "asr", 1, ""};
  EXPECT_EQ(json::parse(encode_message(hello)), json::parse(R"({"type":"hello","stage":"asr","version":1})"));

  Message req{MessageType::kRequest, 7, json{{"audio", "/a.wav"}}, "", 0, ""};
  EXPECT_EQ(json::parse(encode_message(req)),
            json::parse(R"({"type":"request","id":7,"payload":{"audio":"/a.wav"}})"));

  Message err{MessageType::kError, 9, {}, "", 0, "boom"};
  EXPECT_EQ(json::parse(encode_message(err)), json::parse(R"({"type":"error","id":9,"message":"boom"})"));
  EXPECT_EQ(encode_message(req).find('\n'), std::string::npos);
}

TEST(Protocol, RoundTrips) {
  for (MessageType t : {MessageType::kRequest, MessageType::kResponse, MessageType::kPing, MessageType::kPong}) {
    Message m{t, 42, t == MessageType::kRequest || t == MessageType::kResponse ? json{{"x", 1}} : json(), "", 0, ""};
    const Message back = decode_message(encode_message(m));
    EXPECT_EQ(back.type, t);
    EXPECT_EQ(back.id, 42u);
    if (t == MessageType::kResponse) {
      EXPECT_EQ(back.payload, (json{{"x", 1}}));
    }
  }
}

TEST(Protocol, RejectsMalformed) {
  EXPECT_THROW(decode_message("not json"), ParseError);
  EXPECT_THROW(decode_message("[1,2]"), ParseError);
  EXPECT_THROW(decode_message(R"({"id":1})"), ValidationError);
  EXPECT_THROW(decode_message(R"({"type":"response","id":-1})"), ValidationError);
  EXPECT_THROW(decode_message(R"({"type":"response"})"), ValidationError);
  EXPECT_THROW(decode_message(R"({"type":"hello","stage":"asr"})"), ValidationError);
  EXPECT_THROW(decode_message(R"({"type":"shout","id":1})"), ValidationError);
}

TEST(Protocol, ErrorWithoutMessageGetsDefault) {
  const Message m = decode_message(R"({"type":"error","id":3})");
  EXPECT_EQ(m.type, MessageType::kError);
  EXPECT_FALSE(m.message.empty());
}
