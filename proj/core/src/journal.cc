#include "wildcut/journal.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wildcut/error.h"
#include "wildcut/manifest.h"

namespace wildcut {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view kind_name(JournalEntry::Kind k) {
  switch (k) {
    case JournalEntry::Kind::kStage: return "stage";
    case JournalEntry::Kind::kDone: return "done";
    case JournalEntry::Kind::kRun: return "run";
  }
  return "stage";
}

void write_all(int fd, const std::string& data, const std::filesystem::path& path) {
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(fmt::format("{}: write failed: {}", path.string(), std::strerror(errno)));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

JournalHeader decode_header(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("journal header: {}", e.what()), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (j.value("kind", "") != "header") throw ValidationError("kind", "first journal line is not a header");
  JournalHeader h;
  h.version = j.value("version", 0);
  h.input_set_hash = j.value("input_set_hash", "");
  h.config_hash = j.value("config_hash", "");
  return h;
}

}  // namespace

std::string encode_header(const JournalHeader& h) {
  ordered_json j;
  j["kind"] = "header";
  j["version"] = h.version;
  j["input_set_hash"] = h.input_set_hash;
  j["config_hash"] = h.config_hash;
  return j.dump();
}

std::string encode_entry(const JournalEntry& e) {
  ordered_json j;
  j["kind"] = kind_name(e.kind);
  if (e.kind != JournalEntry::Kind::kRun) j["source_id"] = e.source_id;
  if (e.kind == JournalEntry::Kind::kStage) j["stage"] = e.stage;
  j["wall_s"] = e.wall_s;
  j["outcome"] = e.ok ? "ok" : "failed";
  if (!e.ok) j["reason"] = e.reason;
  if (!e.hash.empty()) j["hash"] = e.hash;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

JournalEntry decode_entry(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("journal: {}", e.what()), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!j.is_object()) throw ParseError("journal: expected an object", 0);
  JournalEntry e;
  const std::string kind = j.value("kind", "");
  if (kind == "stage") {
    e.kind = JournalEntry::Kind::kStage;
  } else if (kind == "done") {
    e.kind = JournalEntry::Kind::kDone;
  } else if (kind == "run") {
    e.kind = JournalEntry::Kind::kRun;
  } else {
    throw ValidationError("kind", "unknown journal entry kind '" + kind + "'");
  }
  e.source_id = j.value("source_id", "");
  e.stage = j.value("stage", "");
  e.wall_s = j.value("wall_s", 0.0);
  const std::string outcome = j.value("outcome", "");
  if (outcome != "ok" && outcome != "failed") throw ValidationError("outcome", "must be ok or failed");
  e.ok = outcome == "ok";
  e.reason = j.value("reason", "");
  e.hash = j.value("hash", "");
  if (e.kind != JournalEntry::Kind::kRun && e.source_id.empty()) {
    throw ValidationError("source_id", "missing");
  }
  return e;
}

JournalContents read_journal(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw ValidationError("header", "journal " + path.string() + " is empty");
  JournalContents out;
  out.header = decode_header(lines.front());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    try {
      out.entries.push_back(decode_entry(lines[i]));
    } catch (const Error&) {
      if (i + 1 == lines.size()) {
        out.torn_tail = true;
        break;
      }
      throw ParseError(fmt::format("{}: damaged journal line {}", path.string(), i + 1), 0);
    }
  }
  return out;
}

JournalWriter::JournalWriter(std::filesystem::path path, std::optional<JournalHeader> header)
    : path_(std::move(path)) {
  const int flags = O_WRONLY | O_APPEND | O_CLOEXEC | (header ? O_CREAT | O_TRUNC : 0);
  fd_ = ::open(path_.c_str(), flags, 0644);
  if (fd_ < 0) {
    throw IoError(fmt::format("{}: cannot open journal: {}", path_.string(), std::strerror(errno)));
  }
  if (header) {
    write_all(fd_, encode_header(*header) + "\n", path_);
    ::fsync(fd_);
  } else {
    // Cut a torn final line back to the last complete entry.
    std::string bytes;
    {
      std::ifstream in(path_, std::ios::binary);
      bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    if (!bytes.empty() && bytes.back() != '\n') {
      const auto keep = bytes.rfind('\n');
      const off_t len = keep == std::string::npos ? 0 : static_cast<off_t>(keep + 1);
      if (::ftruncate(fd_, len) != 0) {
        throw IoError(fmt::format("{}: cannot truncate torn journal tail: {}", path_.string(), std::strerror(errno)));
      }
    }
  }
  writer_ = std::thread([this] { drain(); });
}

JournalWriter::~JournalWriter() {
  queue_.close();
  if (writer_.joinable()) writer_.join();
  if (fd_ >= 0) {
    ::fsync(fd_);
    ::close(fd_);
  }
}

void JournalWriter::append(const JournalEntry& entry, bool durable) {
  Pending p;
  p.line = encode_entry(entry) + "\n";
  p.durable = durable;
  auto written = p.written.get_future();
  if (!queue_.push(std::move(p))) throw IoError("journal writer is closed");
  written.get();
}

void JournalWriter::drain() {
  while (auto p = queue_.pop()) {
    try {
      write_all(fd_, p->line, path_);
      if (p->durable && ::fsync(fd_) != 0) {
        throw IoError(fmt::format("{}: fsync failed: {}", path_.string(), std::strerror(errno)));
      }
      p->written.set_value();
    } catch (...) {
      p->written.set_exception(std::current_exception());
    }
  }
}

}  // namespace wildcut
