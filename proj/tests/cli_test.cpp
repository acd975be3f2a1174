#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "echo/bytes.hpp"
#include "echo/motion/io.hpp"
#include "test_util.hpp"

extern char** environ;

namespace echo {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("echo_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  RunResult run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(ECHO_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  void write_clip(const std::string& name, std::size_t frames, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    auto clip = testing::still_clip(frames);
    std::normal_distribution<double> n(0.0, 0.1);
    for (auto& f : clip.frames) {
      for (std::size_t j = 0; j < kNumJoints; ++j) f.values[j] = static_cast<float>(n(rng));
      f.values[kRootVelOffset] = 0.01f;
    }
    write_emc(path(name), clip);
  }

  fs::path dir_;
};

const std::regex kErrorLine(R"(^error: code=[A-Za-z]+ message=".*"\n$)");

TEST_F(Cli, ConvertRoundTripIsBitIdentical) {
  write_clip("a.emc", 40, 1);
  ASSERT_EQ(run("convert " + path("a.emc") + " --out " + path("a.csv")).code, 0);
  ASSERT_EQ(run("convert " + path("a.csv") + " --out " + path("b.emc")).code, 0);
  EXPECT_EQ(read_file_bytes(path("a.emc")), read_file_bytes(path("b.emc")));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("eval").code, 2);
  EXPECT_EQ(run("eval mss " + path("missing.emc")).code, 2);
  EXPECT_EQ(run("serve --pace sometimes --oracle").code, 2);
  EXPECT_EQ(run("serve").code, 2);
  EXPECT_EQ(run("client --prompt walk").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, RuntimeErrorsAreMachineReadable) {
  const auto r = run("sample --prompt walk --out " + path("x.emc") + " --scheduler dpm-solver");
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(std::regex_match(r.err, kErrorLine)) << r.err;
  EXPECT_NE(r.err.find("code=UnsupportedScheduler"), std::string::npos);

  std::ofstream(path("bad.emc")) << "not a clip";
  const auto bad = run("eval mss " + path("bad.emc"));
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(std::regex_match(bad.err, kErrorLine)) << bad.err;
}

TEST_F(Cli, EvalMssAndRtc) {
  write_clip("a.emc", 50, 2);
  const auto r = run("eval mss " + path("a.emc") + " --limits " + ECHO_DATA_DIR "/g1.limits");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_search(r.out, std::regex("mss=[0-9.e-]+ s_pos=[0-9.e-]+ s_vel=[0-9.e-]+ s_acc=")));
  const auto t = run("eval rtc " + path("a.emc") + " " + path("a.emc"));
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("rtc=1 "), std::string::npos);
}

TEST_F(Cli, EvalEmbeddingMetrics) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  {
    std::ofstream m(path("m.csv")), t(path("t.csv"));
    for (int i = 0; i < 40; ++i) {
      for (int k = 0; k < 4; ++k) {
        const double v = n(rng);
        m << (k ? "," : "") << v;
        t << (k ? "," : "") << v + 0.01 * n(rng);
      }
      m << '\n';
      t << '\n';
    }
  }
  const auto fid = run("eval fid " + path("m.csv") + " " + path("m.csv"));
  ASSERT_EQ(fid.code, 0) << fid.err;
  EXPECT_NE(fid.out.find("fid="), std::string::npos);
  const auto rp = run("eval rprec " + path("m.csv") + " " + path("t.csv") + " --pool 32");
  ASSERT_EQ(rp.code, 0) << rp.err;
  EXPECT_NE(rp.out.find("top1=1 "), std::string::npos) << rp.out;
  EXPECT_EQ(run("eval div " + path("m.csv") + " --pairs 10").code, 0);
  EXPECT_EQ(run("eval mmdist " + path("m.csv") + " " + path("t.csv")).code, 0);

  std::ofstream(path("k.csv")) << "0,0,0,1,0,0\n0,0,0,1,1,0\n";
  const auto mp = run("eval mpjpe " + path("k.csv") + " " + path("k.csv"));
  ASSERT_EQ(mp.code, 0) << mp.err;
  EXPECT_EQ(mp.out, "g_mpjpe_mm=0 mpjpe_mm=0\n");
}

TEST_F(Cli, SampleWritesClip) {
  const auto r = run("sample --prompt walk --frames 30 --steps 5 --seed 4 --out " + path("s.emc"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_emc(path("s.emc")).clip.size(), 30u);
}

TEST_F(Cli, RecoverBuildAndQuery) {
  fs::create_directories(dir_ / "lib");
  write_clip("lib/a.emc", 5, 5);
  write_clip("lib/b.emc", 5, 6);
  const auto b = run("recover build-index " + path("lib"));
  ASSERT_EQ(b.code, 0) << b.err;
  const auto q = run("recover query --index " + path("lib/index.txt") + " --gravity 0,0,-1 --joints-from " +
                     path("lib/b.emc"));
  ASSERT_EQ(q.code, 0) << q.err;
  EXPECT_NE(q.out.find("index=1 clip=b.emc joint_distance=0 "), std::string::npos) << q.out;
  EXPECT_EQ(run("recover query --index " + path("lib/index.txt") + " --gravity 0,0,-1 --joints 1,2").code, 1);
}

/// Background `echo serve`; reads the bound port from its first output line.
class ServeProcess {
 public:
  ServeProcess(const std::string& args, const char* bind_env) {
    int fds[2];
    EXPECT_EQ(::pipe(fds), 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[0]);

    std::vector<std::string> argv_s{ECHO_CLI};
    std::istringstream in(args);
    for (std::string a; in >> a;) argv_s.push_back(a);
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);

    std::vector<std::string> env_s;
    for (char** e = environ; *e != nullptr; ++e) {
      if (std::string_view(*e).starts_with("ECHO_BIND=")) continue;
      env_s.emplace_back(*e);
    }
    if (bind_env != nullptr) env_s.push_back(std::string("ECHO_BIND=") + bind_env);
    std::vector<char*> envp;
    for (auto& e : env_s) envp.push_back(e.data());
    envp.push_back(nullptr);

    EXPECT_EQ(posix_spawn(&pid_, ECHO_CLI, &actions, nullptr, argv.data(), envp.data()), 0);
    posix_spawn_file_actions_destroy(&actions);
    ::close(fds[1]);
    out_ = ::fdopen(fds[0], "r");
    char line[256] = {};
    if (std::fgets(line, sizeof(line), out_) != nullptr) first_line_ = line;
    std::smatch m;
    if (std::regex_search(first_line_, m, std::regex(R"(://[^ ]*:([0-9]+) )"))) port_ = std::stoi(m[1]);
  }

  ~ServeProcess() {
    ::kill(pid_, SIGINT);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::fclose(out_);
  }

  int port() const { return port_; }
  const std::string& first_line() const { return first_line_; }

 private:
  pid_t pid_ = 0;
  FILE* out_ = nullptr;
  std::string first_line_;
  int port_ = 0;
  int exit_code_ = -1;
};

TEST_F(Cli, ServeAndClientOverBothTransports) {
  fs::create_directories(dir_ / "lib");
  write_clip("lib/walk_in_circle.emc", 120, 7);
  for (const std::string transport : {"ws", "tcp"}) {
    ServeProcess server("serve --bind 127.0.0.1:0 --pace burst --transport " + transport + " --library " +
                            path("lib"),
                        nullptr);
    ASSERT_GT(server.port(), 0) << server.first_line();
    const std::string url = transport + "://127.0.0.1:" + std::to_string(server.port());
    const auto r = run("client --url " + url + " --prompt 'walk in circle' --prompt 'Walk In Circle' --out " +
                       path("got.emc") + " --log " + path("log.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("motion_id=2 frames=120"), std::string::npos) << r.out;
    EXPECT_EQ(read_file_bytes(path("got.emc")), read_file_bytes(path("lib/walk_in_circle.emc")));
    EXPECT_NE(slurp(path("log.json")).find("\"first_chunk_latency_ms\""), std::string::npos);

    const auto miss = run("client --url " + url + " --prompt 'fly away'");
    EXPECT_EQ(miss.code, 1);
    EXPECT_NE(miss.err.find("code=UnknownPrompt"), std::string::npos) << miss.err;
  }
}

TEST_F(Cli, ServeReadsBindFromEnvironment) {
  ServeProcess server("serve --oracle --pace burst", "127.0.0.1:0");
  ASSERT_GT(server.port(), 0) << server.first_line();
  const auto r = run("client --url ws://127.0.0.1:" + std::to_string(server.port()) +
                     " --prompt anything --frames 40 --out " + path("o.emc"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_emc(path("o.emc")).clip.size(), 40u);
}

}  // namespace
}  // namespace echo
