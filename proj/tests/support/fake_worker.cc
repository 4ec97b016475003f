// Protocol test worker. Speaks the line protocol on stdio and misbehaves on
// request, depending on --mode:
//
//   ok                 well-behaved; answers conformance and stage payloads
//   wrong-stage        announces a different stage in hello
//   bad-version        announces protocol version 2
//   exit-before-hello  writes to stderr and exits with status 3
//   silent             never says hello
//   garbage            prints a non-JSON line instead of hello
//   reorder            answers requests in reverse order, in groups of up to
//                      four (a group closes early when input goes quiet)
//   drop-every-third   never answers every third request
//   no-pong            ignores pings
//   error              answers every request with an error
//   crash-once         exits on the first request if --state does not exist
//                      yet (creating it), behaves like ok afterwards
//   short-batch        returns one result fewer than asked for (asr)
//
// Stage payloads are answered with real computations where that is cheap:
// vad runs the reference detector on the file, asr derives text from the
// clip duration.

#include <poll.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wildcut/audio_io.h"
#include "wildcut/standardize.h"
#include "wildcut/vad.h"

using nlohmann::json;

namespace {

std::string stage;
std::string mode = "ok";
std::string state_file;
int delay_ms = 0;

void emit(const json& j) {
  std::cout << j.dump() << "\n" << std::flush;
}

json answer(const json& payload) {
  if (payload.contains("conformance")) {
    const std::string kind = payload["conformance"];
    if (kind == "echo") return json{{"value", payload.value("value", -1)}};
    if (kind == "sleep") {
      std::this_thread::sleep_for(std::chrono::duration<double>(payload.value("seconds", 1.0)));
      return json{{"slept", true}};
    }
    throw std::runtime_error("conformance failure requested");
  }
  if (stage == "separate") return json{{"audio", payload.at("audio")}};
  if (stage == "diarize") {
    return json{{"turns", json::array({{{"speaker", "spk0"},
                                        {"start_s", 0.0},
                                        {"end_s", payload.at("duration_s").get<double>()}}})}};
  }
  if (stage == "vad") {
    const wildcut::RawAudio raw = wildcut::decode_audio(payload.at("audio").get<std::string>());
    const auto mono = wildcut::to_mono(raw);
    json regions = json::array();
    for (const auto& r : wildcut::reference_vad(mono, raw.sample_rate, wildcut::VadParams{})) {
      regions.push_back({r.start_s, r.end_s});
    }
    return json{{"regions", regions}};
  }
  if (stage == "asr") {
    json results = json::array();
    const json hint = payload.value("language_hint", json());
    for (const auto& item : payload.at("items")) {
      const double dur = item.at("end_s").get<double>() - item.at("start_s").get<double>();
      const auto chars = static_cast<std::size_t>(std::max(1L, std::lround(dur / 0.08)));
      results.push_back({{"ok", true},
                         {"text", std::string(chars, 'w')},
                         {"language", hint.is_string() ? hint.get<std::string>() : "en"},
                         {"lang_confidence", 0.93}});
    }
    if (mode == "short-batch" && !results.empty()) results.erase(results.end() - 1);
    return json{{"results", results}};
  }
  if (stage == "quality") return json{{"score", 4.25}};
  throw std::runtime_error("unknown stage " + stage);
}

// True when another line is already buffered or arrives within 20 ms.
bool input_pending() {
  if (std::cin.rdbuf()->in_avail() > 0) return true;
  pollfd fd{0, POLLIN, 0};
  return ::poll(&fd, 1, 20) > 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"protocol test worker"};
  app.add_option("--stage", stage)->required();
  app.add_option("--mode", mode);
  app.add_option("--state", state_file);
  app.add_option("--delay-ms", delay_ms);
  CLI11_PARSE(app, argc, argv);
  std::ios::sync_with_stdio(false);  // lets input_pending() see buffered lines

  if (mode == "exit-before-hello") {
    std::cerr << "model load failed: checkpoint not found\n";
    return 3;
  }
  if (mode == "silent") {
    std::this_thread::sleep_for(std::chrono::hours(1));
    return 0;
  }
  if (mode == "garbage") {
    std::cout << "starting up...\n" << std::flush;
  } else {
    emit({{"type", "hello"},
          {"stage", mode == "wrong-stage" ? (stage == "asr" ? "vad" : "asr") : stage},
          {"version", mode == "bad-version" ? 2 : 1}});
  }

  std::vector<json> held;  // reorder mode
  std::size_t requests = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    json msg;
    try {
      msg = json::parse(line);
    } catch (const json::exception&) {
      std::cerr << "unparseable line\n";
      continue;
    }
    const std::string type = msg.value("type", "");
    const auto id = msg.value("id", std::uint64_t{0});
    if (type == "ping") {
      if (mode != "no-pong") emit({{"type", "pong"}, {"id", id}});
      continue;
    }
    if (type != "request") continue;
    ++requests;

    if (mode == "crash-once" && !state_file.empty() && !std::filesystem::exists(state_file)) {
      std::ofstream(state_file) << "crashed\n";
      std::cerr << "simulated crash\n";
      return 9;
    }
    if (mode == "drop-every-third" && requests % 3 == 0) continue;
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));

    json reply;
    if (mode == "error") {
      reply = {{"type", "error"}, {"id", id}, {"message", "this worker always fails"}};
    } else {
      try {
        reply = {{"type", "response"}, {"id", id}, {"payload", answer(msg.value("payload", json::object()))}};
      } catch (const std::exception& e) {
        reply = {{"type", "error"}, {"id", id}, {"message", e.what()}};
      }
    }
    if (mode == "reorder") {
      held.push_back(std::move(reply));
      if (held.size() == 4 || !input_pending()) {
        for (auto it = held.rbegin(); it != held.rend(); ++it) emit(*it);
        held.clear();
      }
      continue;
    }
    emit(reply);
  }
  for (auto it = held.rbegin(); it != held.rend(); ++it) emit(*it);
  return 0;
}
