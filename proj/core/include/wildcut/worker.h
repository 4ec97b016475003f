#pragma once

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wildcut/protocol.h"

namespace wildcut {

struct WorkerOptions {
  Stage stage = Stage::kAsr;
  std::vector<std::string> command;
  double handshake_timeout_s = 30.0;
  double request_timeout_s = 300.0;
  int max_retries = 2;
  int concurrency_slots = 1;
  int processes = 1;
  double ping_interval_s = 60.0;
};

// Terminal outcome of one request id.
struct WorkerReply {
  enum class Kind { kResponse, kError, kTransportFailure };
  Kind kind = Kind::kTransportFailure;
  nlohmann::json payload;
  std::string message;
};

// One child process speaking the line protocol over its stdio. A single
// reader thread demultiplexes responses by id; sends are thread safe.
class WorkerProcess {
 public:
  // Starts the child and waits for its hello. Throws BackendUnavailable on
  // spawn failure, handshake timeout, early exit (message carries the stderr
  // tail), stage mismatch or version mismatch.
  static std::unique_ptr<WorkerProcess> spawn(Stage stage,
                                              const std::vector<std::string>& command,
                                              double handshake_timeout_s);

  ~WorkerProcess();
  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  // Sends a request and returns the future of its terminal outcome.
  std::future<WorkerReply> send(const nlohmann::json& payload, std::uint64_t* id_out = nullptr);

  // Sends a ping; returns its id.
  std::uint64_t ping();
  std::uint64_t last_pong_id() const { return last_pong_.load(); }

  bool alive() const { return !exited_.load(); }
  pid_t pid() const { return pid_; }
  int negotiated_version() const { return version_; }
  std::size_t in_flight() const;
  std::string stderr_tail() const;

 private:
  WorkerProcess() = default;
  void read_stdout();
  void read_stderr();
  void fail_pending(const std::string& why);
  bool write_line(const std::string& line);

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  Stage stage_ = Stage::kAsr;
  int version_ = 0;

  std::thread stdout_thread_;
  std::thread stderr_thread_;

  std::mutex write_mu_;
  mutable std::mutex mu_;
  std::map<std::uint64_t, std::promise<WorkerReply>> pending_;
  std::uint64_t next_id_ = 1;
  std::atomic<std::uint64_t> last_pong_{0};
  std::atomic<bool> exited_{false};

  std::promise<nlohmann::json> hello_;
  bool hello_seen_ = false;

  mutable std::mutex err_mu_;
  std::condition_variable err_cv_;
  std::string err_tail_;
  bool err_eof_ = false;
};

// A fixed set of worker processes for one stage. At most concurrency_slots
// requests are outstanding across the pool; further callers block. Timed
// out or crashed requests are retried on a restarted worker up to
// max_retries times.
class WorkerPool {
 public:
  explicit WorkerPool(WorkerOptions options);
  ~WorkerPool();

  // Throws StageError after retries are exhausted or on an error reply.
  nlohmann::json request(const nlohmann::json& payload);

  int negotiated_version() const;
  std::size_t restarts() const { return restarts_.load(); }
  std::size_t max_outstanding() const { return max_outstanding_.load(); }
  const WorkerOptions& options() const { return options_; }

 private:
  std::shared_ptr<WorkerProcess> pick(std::size_t* index);
  void restart(std::size_t index, const std::shared_ptr<WorkerProcess>& broken);
  void monitor();

  WorkerOptions options_;
  std::mutex mu_;
  std::vector<std::shared_ptr<WorkerProcess>> procs_;
  std::vector<int> missed_pongs_;
  std::vector<std::uint64_t> last_ping_;
  std::counting_semaphore<1 << 20> slots_;
  std::atomic<std::size_t> outstanding_{0};
  std::atomic<std::size_t> max_outstanding_{0};
  std::atomic<std::size_t> restarts_{0};
  std::atomic<std::size_t> round_robin_{0};

  std::mutex monitor_mu_;
  std::condition_variable monitor_cv_;
  bool stopping_ = false;
  std::thread monitor_thread_;
};

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  bool passed() const;
};

// Engine-side protocol conformance driver: handshake, ping, correlation of
// concurrent requests, error replies and request timeouts. Workers must
// answer the conformance payloads documented in docs/protocol.md.
ConformanceReport run_conformance(const WorkerOptions& options);

}  // namespace wildcut
