#include "wildcut/worker.h"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <spdlog/spdlog.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fmt/format.h>

#include "wildcut/error.h"

extern char** environ;

namespace wildcut {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kStderrTailBytes = 2048;

std::chrono::milliseconds to_ms(double seconds) {
  return std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000.0));
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string join_argv(const std::vector<std::string>& argv) {
  std::string s;
  for (const auto& a : argv) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

WorkerReply transport_failure(std::string why) {
  WorkerReply r;
  r.kind = WorkerReply::Kind::kTransportFailure;
  r.message = std::move(why);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// WorkerProcess

std::unique_ptr<WorkerProcess> WorkerProcess::spawn(Stage stage,
                                                    const std::vector<std::string>& command,
                                                    double handshake_timeout_s) {
  if (command.empty()) throw BackendUnavailable("worker command is empty");
  ignore_sigpipe();

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
      ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw BackendUnavailable(fmt::format("pipe: {}", std::strerror(errno)));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], 2);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  // Own process group, so a kill reaches helpers the worker may start.
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::vector<char*> argv;
  for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    throw BackendUnavailable(
        fmt::format("cannot start worker '{}': {}", join_argv(command), std::strerror(rc)));
  }

  std::unique_ptr<WorkerProcess> proc(new WorkerProcess());
  proc->pid_ = pid;
  proc->stage_ = stage;
  proc->stdin_fd_ = in_pipe[1];
  proc->stdout_fd_ = out_pipe[0];
  proc->stderr_fd_ = err_pipe[0];
  auto hello = proc->hello_.get_future();
  proc->stdout_thread_ = std::thread([p = proc.get()] { p->read_stdout(); });
  proc->stderr_thread_ = std::thread([p = proc.get()] { p->read_stderr(); });

  auto fail = [&](const std::string& why) -> BackendUnavailable {
    proc.reset();  // kills the child and joins readers
    return BackendUnavailable(why);
  };

  if (hello.wait_for(to_ms(handshake_timeout_s)) != std::future_status::ready) {
    throw fail(fmt::format("worker '{}' sent no hello within {:.1f}s", join_argv(command),
                           handshake_timeout_s));
  }
  json hello_msg;
  try {
    hello_msg = hello.get();
  } catch (const std::exception& e) {
    // Reader already saw EOF; collect the complete stderr before reporting.
    ::kill(-proc->pid_, SIGKILL);
    proc->stderr_thread_.join();
    const std::string tail = proc->stderr_tail();
    throw fail(fmt::format("worker '{}' failed before hello: {}; stderr tail: {}",
                           join_argv(command), e.what(), tail));
  }
  const std::string announced = hello_msg.at("stage").get<std::string>();
  const int version = hello_msg.at("version").get<int>();
  if (announced != to_string(stage)) {
    throw fail(fmt::format("stage mismatch: worker '{}' announced '{}' for a '{}' slot",
                           join_argv(command), announced, to_string(stage)));
  }
  if (version != kProtocolVersion) {
    throw fail(fmt::format("version mismatch: worker '{}' speaks version {}, expected {}",
                           join_argv(command), version, kProtocolVersion));
  }
  proc->version_ = version;
  return proc;
}

WorkerProcess::~WorkerProcess() {
  if (pid_ > 0) {
    if (stdin_fd_ >= 0) ::close(stdin_fd_);
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  if (stdout_thread_.joinable()) stdout_thread_.join();
  if (stderr_thread_.joinable()) stderr_thread_.join();
  if (stdout_fd_ >= 0) ::close(stdout_fd_);
  if (stderr_fd_ >= 0) ::close(stderr_fd_);
}

std::future<WorkerReply> WorkerProcess::send(const json& payload, std::uint64_t* id_out) {
  std::promise<WorkerReply> promise;
  auto future = promise.get_future();
  std::uint64_t id = 0;
  {
    std::lock_guard lock(mu_);
    if (exited_.load()) {
      promise.set_value(transport_failure("worker has exited"));
      return future;
    }
    id = next_id_++;
    pending_.emplace(id, std::move(promise));
  }
  if (id_out) *id_out = id;
  Message msg;
  msg.type = MessageType::kRequest;
  msg.id = id;
  msg.payload = payload;
  if (!write_line(encode_message(msg))) {
    std::lock_guard lock(mu_);
    auto it = pending_.find(id);
    if (it != pending_.end()) {
      it->second.set_value(transport_failure("write to worker failed"));
      pending_.erase(it);
    }
  }
  return future;
}

std::uint64_t WorkerProcess::ping() {
  std::uint64_t id;
  {
    std::lock_guard lock(mu_);
    id = next_id_++;
  }
  Message msg;
  msg.type = MessageType::kPing;
  msg.id = id;
  write_line(encode_message(msg));
  return id;
}

std::size_t WorkerProcess::in_flight() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

std::string WorkerProcess::stderr_tail() const {
  std::lock_guard lock(err_mu_);
  return err_tail_;
}

bool WorkerProcess::write_line(const std::string& line) {
  std::lock_guard lock(write_mu_);
  std::string buf = line;
  buf += '\n';
  const char* p = buf.data();
  std::size_t left = buf.size();
  while (left > 0) {
    const ssize_t n = ::write(stdin_fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  return true;
}

void WorkerProcess::fail_pending(const std::string& why) {
  std::map<std::uint64_t, std::promise<WorkerReply>> orphans;
  {
    std::lock_guard lock(mu_);
    exited_.store(true);
    orphans.swap(pending_);
  }
  for (auto& [id, promise] : orphans) promise.set_value(transport_failure(why));
}

void WorkerProcess::read_stdout() {
  std::string buffer;
  char chunk[8192];
  auto handle = [&](const std::string& line) {
    if (line.empty()) return;
    Message msg;
    try {
      msg = decode_message(line);
    } catch (const Error& e) {
      if (!hello_seen_) {
        hello_seen_ = true;
        hello_.set_exception(std::make_exception_ptr(
            BackendUnavailable(std::string("malformed handshake: ") + e.what())));
      } else {
        spdlog::warn("worker {}: ignoring malformed line: {}", pid_, e.what());
      }
      return;
    }
    switch (msg.type) {
      case MessageType::kHello:
        if (!hello_seen_) {
          hello_seen_ = true;
          hello_.set_value(json{{"stage", msg.stage}, {"version", msg.version}});
        }
        break;
      case MessageType::kResponse:
      case MessageType::kError: {
        std::promise<WorkerReply> promise;
        {
          std::lock_guard lock(mu_);
          auto it = pending_.find(msg.id);
          if (it == pending_.end()) return;  // late reply to an abandoned id
          promise = std::move(it->second);
          pending_.erase(it);
        }
        WorkerReply reply;
        if (msg.type == MessageType::kResponse) {
          reply.kind = WorkerReply::Kind::kResponse;
          reply.payload = std::move(msg.payload);
        } else {
          reply.kind = WorkerReply::Kind::kError;
          reply.message = std::move(msg.message);
        }
        promise.set_value(std::move(reply));
        break;
      }
      case MessageType::kPong: {
        std::uint64_t prev = last_pong_.load();
        while (msg.id > prev && !last_pong_.compare_exchange_weak(prev, msg.id)) {
        }
        break;
      }
      default:
        break;
    }
  };

  for (;;) {
    const ssize_t n = ::read(stdout_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      handle(buffer.substr(start, nl - start));
    }
    buffer.erase(0, start);
  }
  if (!hello_seen_) {
    hello_seen_ = true;
    hello_.set_exception(
        std::make_exception_ptr(BackendUnavailable("worker exited before hello")));
  }
  // Give the stderr reader a moment to drain, so whoever sees the failure
  // also sees the worker's last words.
  {
    std::unique_lock lock(err_mu_);
    err_cv_.wait_for(lock, std::chrono::milliseconds(500), [this] { return err_eof_; });
  }
  fail_pending("worker exited");
}

void WorkerProcess::read_stderr() {
  char chunk[4096];
  for (;;) {
    const ssize_t n = ::read(stderr_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    std::lock_guard lock(err_mu_);
    err_tail_.append(chunk, static_cast<std::size_t>(n));
    if (err_tail_.size() > kStderrTailBytes) {
      err_tail_.erase(0, err_tail_.size() - kStderrTailBytes);
    }
  }
  {
    std::lock_guard lock(err_mu_);
    err_eof_ = true;
  }
  err_cv_.notify_all();
}

// ---------------------------------------------------------------------------
// WorkerPool

WorkerPool::WorkerPool(WorkerOptions options)
    : options_(std::move(options)), slots_(std::max(1, options_.concurrency_slots)) {
  const int n = std::max(1, options_.processes);
  for (int i = 0; i < n; ++i) {
    procs_.push_back(WorkerProcess::spawn(options_.stage, options_.command,
                                          options_.handshake_timeout_s));
  }
  missed_pongs_.assign(procs_.size(), 0);
  last_ping_.assign(procs_.size(), 0);
  if (options_.ping_interval_s > 0) monitor_thread_ = std::thread([this] { monitor(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(monitor_mu_);
    stopping_ = true;
  }
  monitor_cv_.notify_all();
  if (monitor_thread_.joinable()) monitor_thread_.join();
}

int WorkerPool::negotiated_version() const {
  return kProtocolVersion;
}

std::shared_ptr<WorkerProcess> WorkerPool::pick(std::size_t* index) {
  std::lock_guard lock(mu_);
  const std::size_t i = round_robin_.fetch_add(1) % procs_.size();
  *index = i;
  if (!procs_[i]) {
    try {
      procs_[i] = WorkerProcess::spawn(options_.stage, options_.command,
                                       options_.handshake_timeout_s);
      restarts_.fetch_add(1);
    } catch (const BackendUnavailable& e) {
      spdlog::error("{} worker restart failed: {}", to_string(options_.stage), e.what());
    }
  }
  return procs_[i];
}

void WorkerPool::restart(std::size_t index, const std::shared_ptr<WorkerProcess>& broken) {
  std::lock_guard lock(mu_);
  if (procs_[index] != broken) return;  // someone else already replaced it
  procs_[index].reset();
  missed_pongs_[index] = 0;
  last_ping_[index] = 0;
  try {
    procs_[index] = WorkerProcess::spawn(options_.stage, options_.command,
                                         options_.handshake_timeout_s);
    restarts_.fetch_add(1);
  } catch (const BackendUnavailable& e) {
    spdlog::error("{} worker restart failed: {}", to_string(options_.stage), e.what());
  }
}

json WorkerPool::request(const json& payload) {
  slots_.acquire();
  struct Release {
    WorkerPool* pool;
    ~Release() {
      pool->outstanding_.fetch_sub(1);
      pool->slots_.release();
    }
  } release{this};
  const std::size_t now = outstanding_.fetch_add(1) + 1;
  std::size_t prev = max_outstanding_.load();
  while (now > prev && !max_outstanding_.compare_exchange_weak(prev, now)) {
  }

  std::string last_error = "no attempt made";
  const int attempts = 1 + std::max(0, options_.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    std::size_t index = 0;
    auto proc = pick(&index);
    if (!proc) {
      last_error = "worker unavailable";
      continue;
    }
    auto future = proc->send(payload);
    if (future.wait_for(to_ms(options_.request_timeout_s)) != std::future_status::ready) {
      last_error = fmt::format("timed out after {:.3f}s", options_.request_timeout_s);
      spdlog::warn("{} worker {}: request {}; restarting", to_string(options_.stage),
                   proc->pid(), last_error);
      restart(index, proc);
      continue;
    }
    WorkerReply reply = future.get();
    switch (reply.kind) {
      case WorkerReply::Kind::kResponse:
        return std::move(reply.payload);
      case WorkerReply::Kind::kError:
        throw StageError(fmt::format("{} worker error: {}", to_string(options_.stage),
                                     reply.message));
      case WorkerReply::Kind::kTransportFailure:
        last_error = reply.message;
        if (std::string tail = proc->stderr_tail(); !tail.empty()) {
          last_error += "; stderr tail: " + tail;
        }
        restart(index, proc);
        break;
    }
  }
  throw StageError(fmt::format("{} request failed after {} attempt(s): {}",
                               to_string(options_.stage), attempts, last_error));
}

void WorkerPool::monitor() {
  std::unique_lock lock(monitor_mu_);
  while (!monitor_cv_.wait_for(lock, to_ms(options_.ping_interval_s),
                               [this] { return stopping_; })) {
    for (std::size_t i = 0; i < procs_.size(); ++i) {
      std::shared_ptr<WorkerProcess> proc;
      {
        std::lock_guard guard(mu_);
        proc = procs_[i];
      }
      if (!proc) continue;
      bool needs_restart = !proc->alive();
      {
        std::lock_guard guard(mu_);
        if (last_ping_[i] != 0 && proc->last_pong_id() < last_ping_[i]) {
          needs_restart = needs_restart || ++missed_pongs_[i] >= 2;
        } else {
          missed_pongs_[i] = 0;
        }
      }
      if (needs_restart) {
        spdlog::warn("{} worker {} unresponsive; restarting", to_string(options_.stage),
                     proc->pid());
        restart(i, proc);
        continue;
      }
      const std::uint64_t id = proc->ping();
      std::lock_guard guard(mu_);
      if (procs_[i] == proc) last_ping_[i] = id;
    }
  }
}

// ---------------------------------------------------------------------------
// Conformance

bool ConformanceReport::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

ConformanceReport run_conformance(const WorkerOptions& options) {
  ConformanceReport report;
  std::unique_ptr<WorkerProcess> proc;
  try {
    proc = WorkerProcess::spawn(options.stage, options.command, options.handshake_timeout_s);
    report.checks.push_back({"handshake", true, fmt::format("version {}", proc->negotiated_version())});
  } catch (const BackendUnavailable& e) {
    report.checks.push_back({"handshake", false, e.what()});
    for (const char* name : {"ping", "correlation", "error", "timeout"}) {
      report.checks.push_back({name, false, "skipped: handshake failed"});
    }
    return report;
  }
  const auto timeout = to_ms(options.request_timeout_s);

  {
    const std::uint64_t id = proc->ping();
    const auto deadline = Clock::now() + timeout;
    while (proc->last_pong_id() < id && Clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    const bool ok = proc->last_pong_id() >= id;
    report.checks.push_back({"ping", ok, ok ? "pong received" : "no pong"});
  }

  // Requests that never got an answer are reported by the timeout check;
  // the correlation check only looks at the answers that did arrive.
  std::vector<std::uint64_t> unanswered;
  {
    constexpr int kRequests = 8;
    std::vector<std::pair<std::uint64_t, std::future<WorkerReply>>> inflight;
    for (int i = 0; i < kRequests; ++i) {
      std::uint64_t id = 0;
      auto fut = proc->send(json{{"conformance", "echo"}, {"value", i}}, &id);
      inflight.emplace_back(id, std::move(fut));
    }
    std::vector<std::uint64_t> wrong;
    const auto deadline = Clock::now() + timeout;
    for (int i = 0; i < kRequests; ++i) {
      auto& [id, fut] = inflight[static_cast<std::size_t>(i)];
      if (fut.wait_until(deadline) != std::future_status::ready) {
        unanswered.push_back(id);
        continue;
      }
      WorkerReply r = fut.get();
      if (r.kind != WorkerReply::Kind::kResponse || r.payload.value("value", -1) != i) {
        wrong.push_back(id);
      }
    }
    const std::size_t answered = kRequests - unanswered.size();
    const bool ok = wrong.empty() && answered > 0;
    report.checks.push_back(
        {"correlation", ok,
         ok ? fmt::format("{} of {} concurrent requests answered with matching ids", answered, kRequests)
            : fmt::format("mismatched ids: {}; answered: {}", json(wrong).dump(), answered)});
  }

  {
    auto fut = proc->send(json{{"conformance", "fail"}});
    bool ok = false;
    std::string detail = "no reply";
    if (fut.wait_for(timeout) == std::future_status::ready) {
      WorkerReply r = fut.get();
      ok = r.kind == WorkerReply::Kind::kError;
      detail = ok ? "error reply: " + r.message : "expected an error reply";
    }
    report.checks.push_back({"error", ok, detail});
  }
  proc.reset();

  try {
    WorkerOptions pool_opts = options;
    pool_opts.max_retries = 0;
    pool_opts.processes = 1;
    pool_opts.ping_interval_s = 0;
    WorkerPool pool(pool_opts);
    bool timed_out = false;
    try {
      pool.request(json{{"conformance", "sleep"}, {"seconds", options.request_timeout_s * 4}});
    } catch (const StageError& e) {
      timed_out = std::string(e.what()).find("timed out") != std::string::npos;
    }
    bool recovered = false;
    if (timed_out) {
      try {
        recovered = pool.request(json{{"conformance", "echo"}, {"value", 42}}).value("value", -1) == 42;
      } catch (const StageError&) {
      }
    }
    std::string detail = !timed_out   ? "slow request was not timed out"
                         : recovered ? "timed out and recovered after restart"
                                     : "no recovery after restart";
    if (!unanswered.empty()) detail = "requests never answered, ids: " + json(unanswered).dump() + "; " + detail;
    report.checks.push_back({"timeout", timed_out && recovered && unanswered.empty(), detail});
  } catch (const BackendUnavailable& e) {
    report.checks.push_back({"timeout", false, e.what()});
  }
  return report;
}

}  // namespace wildcut
