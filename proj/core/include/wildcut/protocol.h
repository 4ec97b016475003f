#pragma once

// Line-delimited JSON worker protocol, version 1.
//
// Every message is one UTF-8 JSON object followed by LF.
//
//   worker -> engine  {"type":"hello","stage":"asr","version":1}
//   engine -> worker  {"type":"request","id":7,"payload":{...}}
//   worker -> engine  {"type":"response","id":7,"payload":{...}}
//   worker -> engine  {"type":"error","id":7,"message":"..."}
//   engine -> worker  {"type":"ping","id":3}
//   worker -> engine  {"type":"pong","id":3}
//
// Responses may arrive in any order; ids correlate them. Ids are never
// reused within one worker lifetime. Stage payload schemas are documented in
// docs/protocol.md.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace wildcut {

inline constexpr int kProtocolVersion = 1;

enum class Stage { kSeparate, kDiarize, kVad, kAsr, kQuality };

std::string_view to_string(Stage stage);
std::optional<Stage> stage_from_string(std::string_view name);

inline constexpr Stage kAllStages[] = {Stage::kSeparate, Stage::kDiarize, Stage::kVad,
                                       Stage::kAsr, Stage::kQuality};

enum class MessageType { kHello, kRequest, kResponse, kError, kPing, kPong };

struct Message {
  MessageType type = MessageType::kRequest;
  std::uint64_t id = 0;
  nlohmann::json payload;  // request/response body
  std::string stage;       // hello only
  int version = 0;         // hello only
  std::string message;     // error only
};

// Serializes without the trailing newline.
std::string encode_message(const Message& msg);

// Throws ParseError for non-JSON lines and ValidationError for missing or
// ill-typed fields.
Message decode_message(std::string_view line);

}  // namespace wildcut
