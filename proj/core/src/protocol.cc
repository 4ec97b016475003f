#include "wildcut/protocol.h"

#include <fmt/format.h>

#include "wildcut/error.h"

namespace wildcut {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kSeparate: return "separate";
    case Stage::kDiarize: return "diarize";
    case Stage::kVad: return "vad";
    case Stage::kAsr: return "asr";
    case Stage::kQuality: return "quality";
  }
  return "unknown";
}

std::optional<Stage> stage_from_string(std::string_view name) {
  for (Stage s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string encode_message(const Message& msg) {
  ordered_json j;
  switch (msg.type) {
    case MessageType::kHello:
      j["type"] = "hello";
      j["stage"] = msg.stage;
      j["version"] = msg.version;
      break;
    case MessageType::kRequest:
      j["type"] = "request";
      j["id"] = msg.id;
      j["payload"] = msg.payload;
      break;
    case MessageType::kResponse:
      j["type"] = "response";
      j["id"] = msg.id;
      j["payload"] = msg.payload;
      break;
    case MessageType::kError:
      j["type"] = "error";
      j["id"] = msg.id;
      j["message"] = msg.message;
      break;
    case MessageType::kPing:
      j["type"] = "ping";
      j["id"] = msg.id;
      break;
    case MessageType::kPong:
      j["type"] = "pong";
      j["id"] = msg.id;
      break;
  }
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Message decode_message(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("protocol: malformed line: {}", e.what()),
                     e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!j.is_object()) throw ParseError("protocol: expected an object", 0);
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    throw ValidationError("type", "missing message type");
  }
  const std::string type = type_it->get<std::string>();
  Message msg;
  auto need_id = [&] {
    auto it = j.find("id");
    if (it == j.end() || !it->is_number_unsigned()) {
      throw ValidationError("id", "missing or not an unsigned integer");
    }
    msg.id = it->get<std::uint64_t>();
  };
  if (type == "hello") {
    msg.type = MessageType::kHello;
    if (!j.contains("stage") || !j["stage"].is_string()) throw ValidationError("stage", "missing");
    if (!j.contains("version") || !j["version"].is_number_integer()) {
      throw ValidationError("version", "missing");
    }
    msg.stage = j["stage"].get<std::string>();
    msg.version = j["version"].get<int>();
  } else if (type == "request" || type == "response") {
    msg.type = type == "request" ? MessageType::kRequest : MessageType::kResponse;
    need_id();
    msg.payload = j.value("payload", json::object());
  } else if (type == "error") {
    msg.type = MessageType::kError;
    need_id();
    msg.message = j.value("message", std::string("unspecified worker error"));
  } else if (type == "ping" || type == "pong") {
    msg.type = type == "ping" ? MessageType::kPing : MessageType::kPong;
    need_id();
  } else {
    throw ValidationError("type", "unknown message type " + type);
  }
  return msg;
}

}  // namespace wildcut
