#pragma once

#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wildcut/bounded_queue.h"

namespace wildcut {

// First line of journal.jsonl. A resume is refused when either hash differs
// from the current invocation.
struct JournalHeader {
  int version = 1;
  std::string input_set_hash;
  std::string config_hash;

  bool operator==(const JournalHeader&) const = default;
};

// One appended journal line.
//   kStage: `stage` of `source_id` finished; `hash` digests its artifact.
//   kDone:  the source is finished; `hash` digests its part file.
//   kRun:   one invocation ended (or was interrupted before writing this);
//           wall_s is that invocation's wall time.
struct JournalEntry {
  enum class Kind { kStage, kDone, kRun };
  Kind kind = Kind::kStage;
  std::string source_id;
  std::string stage;
  double wall_s = 0.0;
  bool ok = true;
  std::string reason;
  std::string hash;

  bool operator==(const JournalEntry&) const = default;
};

std::string encode_header(const JournalHeader& header);
std::string encode_entry(const JournalEntry& entry);
JournalEntry decode_entry(std::string_view line);

struct JournalContents {
  JournalHeader header;
  std::vector<JournalEntry> entries;
  bool torn_tail = false;  // the last line was incomplete and was ignored
};

// Reads a journal. An unparseable final line (a write cut short by a crash)
// is skipped; damage anywhere else throws ParseError.
JournalContents read_journal(const std::filesystem::path& path);

// Single writer for journal.jsonl. Lines are handed to a writer thread
// through a bounded queue; append() returns once the line is written, and
// once it is on stable storage when `durable` is set.
class JournalWriter {
 public:
  // Creates a new journal starting with `header`, or appends to an existing
  // one when `header` is nullopt.
  JournalWriter(std::filesystem::path path, std::optional<JournalHeader> header);
  ~JournalWriter();
  JournalWriter(const JournalWriter&) = delete;
  JournalWriter& operator=(const JournalWriter&) = delete;

  void append(const JournalEntry& entry, bool durable = false);

  std::size_t queue_high_water() const { return queue_.high_water(); }
  std::size_t queue_capacity() const { return queue_.capacity(); }

 private:
  struct Pending {
    std::string line;
    bool durable = false;
    std::promise<void> written;
  };
  void drain();

  std::filesystem::path path_;
  int fd_ = -1;
  BoundedQueue<Pending> queue_{64};
  std::thread writer_;
};

}  // namespace wildcut
