#pragma once

// Edge-side client: one persistent connection, one request at a time.
// Blocking calls drive a private io_context with deadlines.

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "echo/error.hpp"
#include "echo/metrics/safety.hpp"
#include "echo/motion/clip.hpp"
#include "echo/policy/action_filter.hpp"
#include "echo/stream/server.hpp"
#include "echo/stream/wire.hpp"

namespace echo::stream {

struct Url {
  Transport transport = Transport::WebSocket;
  std::string host;
  std::uint16_t port = 0;
  std::string target = "/";
};

/// Accepts `ws://HOST:PORT[/path]` and `tcp://HOST:PORT`.
inline Url parse_url(std::string_view s) {
  Url u;
  std::string_view rest;
  if (s.starts_with("ws://")) {
    u.transport = Transport::WebSocket;
    rest = s.substr(5);
  } else if (s.starts_with("tcp://")) {
    u.transport = Transport::Tcp;
    rest = s.substr(6);
  } else {
    fail(ErrorCode::InvalidArgument, "URL must start with ws:// or tcp://: " + std::string(s));
  }
  const auto slash = rest.find('/');
  if (slash != std::string_view::npos) {
    require(u.transport == Transport::WebSocket, ErrorCode::InvalidArgument, "tcp URLs take no path");
    u.target = std::string(rest.substr(slash));
    rest = rest.substr(0, slash);
  }
  const auto hp = parse_host_port(rest);
  u.host = hp.host;
  u.port = hp.port;
  return u;
}

using Clock = std::chrono::steady_clock;

/// Blocking message channel over either transport. Any failed or timed-out
/// operation closes the channel.
class Channel {
 public:
  Channel(const Url& url, Clock::duration timeout) : url_(url), ws_(ioc_), socket_(ioc_) {
    tcp::resolver resolver(ioc_);
    boost::system::error_code ec;
    const auto endpoints = resolver.resolve(url.host, std::to_string(url.port), ec);
    require(!ec, ErrorCode::Connection, "cannot resolve " + url.host + ": " + ec.message());
    auto& sock = url.transport == Transport::WebSocket ? ws_.next_layer() : socket_;
    const auto deadline = Clock::now() + timeout;
    run(
        [&](auto done) {
          net::async_connect(sock, endpoints,
                             [done](boost::system::error_code e, const tcp::endpoint&) { done(e); });
        },
        deadline, "connect");
    sock.set_option(tcp::no_delay(true), ec);
    if (url.transport == Transport::WebSocket) {
      ws_.binary(true);
      ws_.read_message_max(wire::kHeaderSize + wire::kMaxPayload);
      run([&](auto done) { ws_.async_handshake(url.host, url.target, done); }, deadline, "websocket handshake");
    }
    open_ = true;
  }

  ~Channel() { close(); }
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  void send_bytes(const Bytes& bytes, Clock::time_point deadline) {
    require(open_, ErrorCode::Connection, "connection is closed");
    if (url_.transport == Transport::WebSocket) {
      run([&](auto done) { ws_.async_write(net::buffer(bytes), [done](auto e, std::size_t) { done(e); }); },
          deadline, "send");
    } else {
      run([&](auto done) { net::async_write(socket_, net::buffer(bytes), [done](auto e, std::size_t) { done(e); }); },
          deadline, "send");
    }
  }

  void send(const wire::Message& m, Clock::time_point deadline) { send_bytes(wire::encode_message(m), deadline); }

  wire::Message receive(Clock::time_point deadline) {
    require(open_, ErrorCode::Connection, "connection is closed");
    try {
      if (url_.transport == Transport::WebSocket) {
        run([&](auto done) { ws_.async_read(buffer_, [done](auto e, std::size_t) { done(e); }); }, deadline,
            "receive");
        const auto data = buffer_.cdata();
        const Bytes bytes(static_cast<const std::uint8_t*>(data.data()),
                          static_cast<const std::uint8_t*>(data.data()) + data.size());
        buffer_.consume(buffer_.size());
        return wire::decode_message(bytes);
      }
      while (true) {
        if (auto m = framer_.next()) return std::move(*m);
        std::size_t got = 0;
        run(
            [&](auto done) {
              socket_.async_read_some(net::buffer(read_buf_), [done, &got](auto e, std::size_t n) {
                got = n;
                done(e);
              });
            },
            deadline, "receive");
        framer_.feed(std::span(read_buf_.data(), got));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Timeout && e.code() != ErrorCode::Connection) close();
      throw;
    }
  }

  void close() {
    if (!open_) return;
    open_ = false;
    boost::system::error_code ec;
    if (url_.transport == Transport::WebSocket) {
      ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
      ws_.next_layer().close(ec);
    } else {
      socket_.shutdown(tcp::socket::shutdown_both, ec);
      socket_.close(ec);
    }
  }

  bool is_open() const { return open_; }
  const Url& url() const { return url_; }

 private:
  template <class Start>
  void run(Start&& start, Clock::time_point deadline, const char* what) {
    boost::system::error_code result;
    bool done = false;
    start([&](boost::system::error_code ec) {
      result = ec;
      done = true;
    });
    ioc_.restart();
    while (!done && Clock::now() < deadline) ioc_.run_one_until(deadline);
    if (!done) {
      close();
      ioc_.restart();
      ioc_.run();  // let the aborted operation complete
      fail(ErrorCode::Timeout, std::string(what) + " timed out");
    }
    if (result) {
      close();
      fail(ErrorCode::Connection, std::string(what) + " failed: " + result.message());
    }
  }

  Url url_;
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
  tcp::socket socket_;
  beast::flat_buffer buffer_;
  std::array<std::uint8_t, 64 * 1024> read_buf_{};
  wire::Framer framer_;
  bool open_ = false;
};

struct ClientOptions {
  double timeout_s = 10.0;  // per message
  double filter_beta = 0.2;
  SafetyLimits limits = SafetyLimits::g1();
  float cfg_scale = 2.5f;
  std::uint16_t num_steps = 10;
  std::uint16_t requested_frames = 0;

  Clock::duration timeout() const {
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_s));
  }
};

struct RequestLog {
  std::string prompt;
  std::uint32_t motion_id = 0;
  std::size_t frames_sent = 0;  // as reported by EndOfMotion
  std::size_t frames_received = 0;
  std::size_t chunks = 0;
  double first_chunk_latency_ms = 0.0;
  double total_ms = 0.0;
  double interval_mean_ms = 0.0;  // between successive chunk arrivals
  double interval_std_ms = 0.0;
  double interval_max_ms = 0.0;
  std::optional<double> online_mss;
  std::vector<double> mss_after_chunk;
  bool trajectory_ok = false;
  std::optional<std::string> error;
};

struct SessionLog {
  std::string url;
  std::vector<RequestLog> requests;
};

inline nlohmann::json to_json(const RequestLog& r) {
  nlohmann::json j{{"prompt", r.prompt},
                   {"motion_id", r.motion_id},
                   {"frames_sent", r.frames_sent},
                   {"frames_received", r.frames_received},
                   {"chunks", r.chunks},
                   {"first_chunk_latency_ms", r.first_chunk_latency_ms},
                   {"total_ms", r.total_ms},
                   {"interval_mean_ms", r.interval_mean_ms},
                   {"interval_std_ms", r.interval_std_ms},
                   {"interval_max_ms", r.interval_max_ms},
                   {"mss_after_chunk", r.mss_after_chunk},
                   {"trajectory_ok", r.trajectory_ok}};
  j["online_mss"] = r.online_mss ? nlohmann::json(*r.online_mss) : nlohmann::json(nullptr);
  j["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const SessionLog& s) {
  nlohmann::json reqs = nlohmann::json::array();
  for (const auto& r : s.requests) reqs.push_back(to_json(r));
  return {{"url", s.url}, {"requests", reqs}};
}

struct RequestResult {
  MotionClip clip;
  std::optional<AbsoluteTrajectory> trajectory;  // empty if a rotation was degenerate
  std::vector<Eigen::VectorXd> joint_targets;    // EMA-filtered, one per frame
  RequestLog log;
};

class Client {
 public:
  explicit Client(const std::string& url, ClientOptions opt = {})
      : opt_(std::move(opt)), channel_(parse_url(url), opt_.timeout()) {
    require(opt_.timeout_s > 0, ErrorCode::InvalidArgument, "timeout must be positive");
    opt_.limits.validate();
    log_.url = url;
  }

  /// Sends one TextCommand and blocks until its EndOfMotion. Server errors
  /// surface as Error with the matching code.
  RequestResult request(const std::string& prompt) {
    RequestLog log;
    log.prompt = prompt;
    try {
      auto result = run_request(prompt, log);
      log_.requests.push_back(result.log);
      return result;
    } catch (const Error& e) {
      log.error = std::string(to_string(e.code())) + ": " + e.what();
      log_.requests.push_back(log);
      throw;
    }
  }

  /// Heartbeat round trip in milliseconds.
  double ping() {
    const auto t0 = Clock::now();
    channel_.send(wire::Heartbeat{}, t0 + opt_.timeout());
    while (true) {
      const auto m = channel_.receive(Clock::now() + opt_.timeout());
      if (std::holds_alternative<wire::Ack>(m)) break;
      if (const auto* err = std::get_if<wire::ErrorMsg>(&m)) {
        fail(wire::error_code_of(err->code), "server: " + err->message);
      }
    }
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  }

  const SessionLog& log() const { return log_; }
  Channel& channel() { return channel_; }
  void close() { channel_.close(); }

 private:
  RequestResult run_request(const std::string& prompt, RequestLog& log) {
    wire::TextCommand cmd{prompt, opt_.cfg_scale, opt_.num_steps, opt_.requested_frames};
    const auto t0 = Clock::now();
    channel_.send(cmd, t0 + opt_.timeout());

    wire::ChunkAssembler assembler;
    std::optional<OnlineSafety> safety;
    policy::ActionFilter filter(opt_.filter_beta);
    RequestResult result;
    std::vector<double> arrivals_ms;

    while (!assembler.done()) {
      auto msg = channel_.receive(Clock::now() + opt_.timeout());
      const double now_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      if (auto* chunk = std::get_if<wire::MotionChunk>(&msg)) {
        assembler.add(*chunk);
        if (arrivals_ms.empty()) {
          log.first_chunk_latency_ms = now_ms;
          log.motion_id = chunk->motion_id;
          safety.emplace(opt_.limits, static_cast<double>(chunk->fps));
        }
        arrivals_ms.push_back(now_ms);
        std::vector<MotionFrame> frames;
        frames.reserve(chunk->frames.size());
        for (const auto& f : chunk->frames) frames.push_back(wire::from_wire(f));
        safety->append(frames);
        if (auto s = safety->score()) log.mss_after_chunk.push_back(s->mss);
        for (const auto& f : frames) {
          Eigen::VectorXd q(static_cast<Eigen::Index>(kNumJoints));
          for (std::size_t j = 0; j < kNumJoints; ++j) q(static_cast<Eigen::Index>(j)) = f.joint_pos()[j];
          result.joint_targets.push_back(filter(q));
        }
      } else if (auto* end = std::get_if<wire::EndOfMotion>(&msg)) {
        require(assembler.motion_id().has_value(), ErrorCode::ProtocolViolation, "end of motion before any chunk");
        assembler.finish(*end);
        log.frames_sent = end->total_frames;
      } else if (auto* err = std::get_if<wire::ErrorMsg>(&msg)) {
        fail(wire::error_code_of(err->code), "server: " + err->message);
      } else if (std::holds_alternative<wire::TextCommand>(msg)) {
        fail(ErrorCode::ProtocolViolation, "server sent a TextCommand");
      }
      // Heartbeat and Ack carry nothing for a request.
    }

    log.total_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    result.clip = assembler.take();
    result.clip.prompt = prompt;
    log.frames_received = result.clip.size();
    log.chunks = arrivals_ms.size();
    if (safety) log.online_mss = safety->score() ? std::optional<double>(safety->score()->mss) : std::nullopt;
    if (arrivals_ms.size() >= 2) {
      std::vector<double> gaps;
      for (std::size_t i = 1; i < arrivals_ms.size(); ++i) gaps.push_back(arrivals_ms[i] - arrivals_ms[i - 1]);
      double sum = 0, sq = 0, mx = 0;
      for (double g : gaps) {
        sum += g;
        mx = std::max(mx, g);
      }
      const double mean = sum / static_cast<double>(gaps.size());
      for (double g : gaps) sq += (g - mean) * (g - mean);
      log.interval_mean_ms = mean;
      log.interval_std_ms = std::sqrt(sq / static_cast<double>(gaps.size()));
      log.interval_max_ms = mx;
    }
    try {
      result.trajectory = decode_clip(result.clip);
      log.trajectory_ok = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateRotation) throw;
    }
    result.log = log;
    return result;
  }

  ClientOptions opt_;
  Channel channel_;
  SessionLog log_;
};

}  // namespace echo::stream
