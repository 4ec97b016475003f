#include <gtest/gtest.h>

#include <thread>

#include "fixtures.h"
#include "wildcut/error.h"
#include "wildcut/worker.h"

using namespace wildcut;
using nlohmann::json;

namespace {

std::vector<std::string> worker(const std::string& mode, const std::string& stage = "asr") {
  return {fixtures::fake_worker(), "--stage", stage, "--mode", mode};
}

WorkerOptions options(const std::string& mode) {
  WorkerOptions o;
  o.stage = Stage::kAsr;
  o.command = worker(mode);
  o.handshake_timeout_s = 5.0;
  o.request_timeout_s = 0.5;
  o.max_retries = 1;
  o.ping_interval_s = 0;
  return o;
}

std::string spawn_error(const std::vector<std::string>& cmd, double timeout = 5.0) {
  try {
    WorkerProcess::spawn(Stage::kAsr, cmd, timeout);
  } catch (const BackendUnavailable& e) {
    return e.what();
  }
  return "";
}

const ConformanceCheck& check(const ConformanceReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no check " + name);
}

}  // namespace

TEST(WorkerProcess, HandshakeAndEcho) {
  auto p = WorkerProcess::spawn(Stage::kAsr, worker("ok"), 5.0);
  EXPECT_EQ(p->negotiated_version(), 1);
  EXPECT_TRUE(p->alive());
  auto fut = p->send(json{{"conformance", "echo"}, {"value", 5}});
  const WorkerReply r = fut.get();
  EXPECT_EQ(r.kind, WorkerReply::Kind::kResponse);
  EXPECT_EQ(r.payload.at("value"), 5);
}

TEST(WorkerProcess, HandshakeFailuresAreDiagnosed) {
  EXPECT_NE(spawn_error(worker("wrong-stage")).find("stage"), std::string::npos);
  EXPECT_NE(spawn_error(worker("bad-version")).find("version"), std::string::npos);
  EXPECT_NE(spawn_error(worker("exit-before-hello")).find("checkpoint not found"), std::string::npos);
  EXPECT_FALSE(spawn_error(worker("garbage")).empty());
  EXPECT_NE(spawn_error(worker("silent"), 0.3).find("hello"), std::string::npos);
  EXPECT_FALSE(spawn_error({"/nonexistent/worker-binary"}).empty());
}

TEST(WorkerProcess, ErrorReplyKeepsWorkerAlive) {
  auto p = WorkerProcess::spawn(Stage::kAsr, worker("ok"), 5.0);
  const WorkerReply bad = p->send(json{{"conformance", "fail"}}).get();
  EXPECT_EQ(bad.kind, WorkerReply::Kind::kError);
  EXPECT_FALSE(bad.message.empty());
  EXPECT_EQ(p->send(json{{"conformance", "echo"}, {"value", 1}}).get().kind, WorkerReply::Kind::kResponse);
}

TEST(WorkerProcess, CrashFailsPendingRequests) {
  fixtures::TempDir dir;
  auto cmd = worker("crash-once");
  cmd.insert(cmd.end(), {"--state", (dir / "state").string()});
  auto p = WorkerProcess::spawn(Stage::kAsr, cmd, 5.0);
  const WorkerReply r = p->send(json{{"conformance", "echo"}, {"value", 1}}).get();
  EXPECT_EQ(r.kind, WorkerReply::Kind::kTransportFailure);
  for (int i = 0; i < 100 && p->alive(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  EXPECT_FALSE(p->alive());
  EXPECT_NE(p->stderr_tail().find("simulated crash"), std::string::npos);
}

TEST(Conformance, WellBehavedWorkerPasses) {
  const ConformanceReport r = run_conformance(options("ok"));
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.checks.size(), 5u);
}

TEST(Conformance, ReorderingIsAllowed) {
  const ConformanceReport r = run_conformance(options("reorder"));
  EXPECT_TRUE(check(r, "correlation").passed) << check(r, "correlation").detail;
  EXPECT_TRUE(r.passed());
}

TEST(Conformance, DroppedResponsesFailTimeoutWithIds) {
  const ConformanceReport r = run_conformance(options("drop-every-third"));
  const auto& t = check(r, "timeout");
  EXPECT_FALSE(t.passed);
  EXPECT_NE(t.detail.find("ids: ["), std::string::npos) << t.detail;
  EXPECT_FALSE(r.passed());
}

TEST(Conformance, MissingPongFailsPing) {
  const ConformanceReport r = run_conformance(options("no-pong"));
  EXPECT_FALSE(check(r, "ping").passed);
  EXPECT_TRUE(check(r, "correlation").passed);
}

TEST(Conformance, AlwaysErroringWorkerFailsCorrelation) {
  const ConformanceReport r = run_conformance(options("error"));
  EXPECT_FALSE(check(r, "correlation").passed);
  EXPECT_TRUE(check(r, "error").passed);
}

TEST(Conformance, HandshakeFailureSkipsTheRest) {
  const ConformanceReport r = run_conformance(options("exit-before-hello"));
  EXPECT_EQ(r.checks.size(), 5u);
  for (const auto& c : r.checks) EXPECT_FALSE(c.passed);
}

TEST(WorkerPool, RetriesOnRestartedWorker) {
  fixtures::TempDir dir;
  WorkerOptions o = options("crash-once");
  o.command.insert(o.command.end(), {"--state", (dir / "state").string()});
  WorkerPool pool(o);
  const json reply = pool.request(json{{"conformance", "echo"}, {"value", 3}});
  EXPECT_EQ(reply.at("value"), 3);
  EXPECT_EQ(pool.restarts(), 1u);
}

TEST(WorkerPool, ErrorReplyIsNotRetried) {
  WorkerPool pool(options("error"));
  try {
    pool.request(json{{"x", 1}});
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("always fails"), std::string::npos);
  }
  EXPECT_EQ(pool.restarts(), 0u);
}

TEST(WorkerPool, TimeoutExhaustsRetries) {
  WorkerOptions o = options("ok");
  o.request_timeout_s = 0.2;
  o.max_retries = 1;
  WorkerPool pool(o);
  try {
    pool.request(json{{"conformance", "sleep"}, {"seconds", 5.0}});
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("2 attempt"), std::string::npos) << e.what();
  }
  EXPECT_EQ(pool.restarts(), 2u);
  EXPECT_EQ(pool.request(json{{"conformance", "echo"}, {"value", 8}}).at("value"), 8);
}

TEST(WorkerPool, SlotsBoundOutstandingRequests) {
  WorkerOptions o = options("ok");
  o.command.insert(o.command.end(), {"--delay-ms", "20"});
  o.concurrency_slots = 2;
  o.processes = 2;
  o.request_timeout_s = 10.0;
  WorkerPool pool(o);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      if (pool.request(json{{"conformance", "echo"}, {"value", i}}).at("value") == i) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 8);
  EXPECT_LE(pool.max_outstanding(), 2u);
  EXPECT_GE(pool.max_outstanding(), 1u);
}

TEST(WorkerPool, MissedPongsTriggerRestart) {
  WorkerOptions o = options("no-pong");
  o.ping_interval_s = 0.05;
  WorkerPool pool(o);
  for (int i = 0; i < 200 && pool.restarts() == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  EXPECT_GE(pool.restarts(), 1u);
}
