#pragma once

// Streaming motion server. Each connection handles its messages in order on
// its own strand; generation runs on a worker pool and its result is
// discarded if the request was superseded meanwhile.

#include <chrono>
#include <cstdlib>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "echo/error.hpp"
#include "echo/stream/backend.hpp"
#include "echo/stream/wire.hpp"

namespace echo::stream {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
using tcp = boost::asio::ip::tcp;

enum class Transport { WebSocket, Tcp };
enum class Pacing { Realtime, Burst };

inline Transport parse_transport(std::string_view s) {
  if (s == "ws" || s == "websocket") return Transport::WebSocket;
  if (s == "tcp") return Transport::Tcp;
  fail(ErrorCode::InvalidArgument, "unknown transport '" + std::string(s) + "' (ws or tcp)");
}

inline Pacing parse_pacing(std::string_view s) {
  if (s == "realtime") return Pacing::Realtime;
  if (s == "burst") return Pacing::Burst;
  fail(ErrorCode::InvalidArgument, "unknown pacing '" + std::string(s) + "' (realtime or burst)");
}

/// Realtime pacing releases chunk k when its first frame is due, i.e. at
/// start_frame / fps after streaming began; EndOfMotion follows at
/// total_frames / fps. Burst sends as fast as the connection drains.
struct ChunkPolicy {
  std::size_t chunk_frames = 25;
  Pacing pacing = Pacing::Realtime;

  void validate() const {
    require(chunk_frames >= 1 && chunk_frames <= 0xFFFF, ErrorCode::InvalidArgument,
            "chunk_frames must lie in [1, 65535]");
  }
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses `HOST:PORT`; brackets around an IPv6 host are stripped.
inline HostPort parse_host_port(std::string_view s) {
  const auto colon = s.rfind(':');
  require(colon != std::string_view::npos && colon > 0, ErrorCode::InvalidArgument,
          "address must look like HOST:PORT, got '" + std::string(s) + "'");
  HostPort hp;
  hp.host = std::string(s.substr(0, colon));
  if (hp.host.size() >= 2 && hp.host.front() == '[' && hp.host.back() == ']') hp.host = hp.host.substr(1, hp.host.size() - 2);
  const auto port = text::parse_number<unsigned>(s.substr(colon + 1));
  require(port <= 65535, ErrorCode::InvalidArgument, "port out of range");
  hp.port = static_cast<std::uint16_t>(port);
  return hp;
}

inline constexpr const char* kDefaultBind = "127.0.0.1:8765";

/// ECHO_BIND if set, otherwise the built-in default.
inline std::string default_bind() {
  const char* env = std::getenv("ECHO_BIND");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(kDefaultBind);
}

struct ServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  Transport transport = Transport::WebSocket;
  ChunkPolicy chunk;
  int io_threads = 2;
  int worker_threads = 2;
  std::size_t max_queued = 4;  // outgoing messages buffered per connection

  void validate() const {
    chunk.validate();
    require(io_threads >= 1 && worker_threads >= 1, ErrorCode::InvalidArgument, "thread counts must be >= 1");
    require(max_queued >= 1, ErrorCode::InvalidArgument, "max_queued must be >= 1");
  }
};

namespace detail {

struct ServerShared {
  std::shared_ptr<const GeneratorBackend> backend;
  ChunkPolicy chunk;
  std::size_t max_queued = 4;
  net::thread_pool* workers = nullptr;
};

inline std::string clamp_text(std::string s) {
  if (s.size() > 1024) s.resize(1024);
  return s;
}

class Session : public std::enable_shared_from_this<Session> {
 public:
  using Executor = net::any_io_executor;  // a strand, set up by the acceptor

  Session(std::shared_ptr<const ServerShared> shared, Executor strand)
      : strand_(std::move(strand)), shared_(std::move(shared)), timer_(strand_) {}
  virtual ~Session() = default;

  virtual void start() = 0;

 protected:
  using WriteHandler = std::function<void(boost::system::error_code)>;
  virtual void write_raw(std::shared_ptr<const Bytes> bytes, WriteHandler done) = 0;
  virtual void close_transport() = 0;

  void handle(const wire::Message& msg) {
    std::visit(
        [this](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, wire::TextCommand>) {
            if (active_) cancel_active();
            begin(m);
          } else if constexpr (std::is_same_v<T, wire::Heartbeat>) {
            enqueue(wire::Ack{});
          } else if constexpr (std::is_same_v<T, wire::Ack>) {
            // Answers to nothing we sent; harmless.
          } else {
            send_error(ErrorCode::ProtocolViolation,
                       std::string("unexpected ") + wire::type_name(wire::type_of(wire::Message(m))) + " from client");
          }
        },
        msg);
  }

  void send_error(ErrorCode code, const std::string& text) {
    enqueue(wire::ErrorMsg{wire::wire_code_of(code), clamp_text(text)});
  }

  /// Flushes what is queued, then closes.
  void close_after_flush() {
    close_after_flush_ = true;
    if (!writing_ && queue_.empty()) shutdown();
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    active_.reset();
    queue_.clear();
    close_transport();
  }

  bool closed() const { return closed_; }

  Executor strand_;

 private:
  struct Outgoing {
    std::shared_ptr<const Bytes> bytes;
    std::uint64_t generation = 0;  // 0 = not part of a motion stream
  };

  struct Active {
    std::uint64_t generation = 0;
    std::uint32_t motion_id = 0;
    bool generating = true;
    std::vector<wire::MotionChunk> chunks;
    std::uint32_t total = 0;
    double fps = kDefaultFps;
    std::size_t next = 0;  // chunks.size() means EndOfMotion is next
    std::chrono::steady_clock::time_point t0;
  };

  struct Generated {
    std::vector<wire::MotionChunk> chunks;
    std::uint32_t total = 0;
    double fps = kDefaultFps;
    std::optional<std::pair<ErrorCode, std::string>> error;
  };

  void cancel_active() {
    const auto gen = active_->generation;
    const auto id = active_->motion_id;
    std::erase_if(queue_, [gen](const Outgoing& o) { return o.generation == gen; });
    timer_.cancel();
    active_.reset();
    send_error(ErrorCode::Cancelled, "motion " + std::to_string(id) + " cancelled by a new command");
  }

  void begin(const wire::TextCommand& cmd) {
    Active a;
    a.generation = ++generation_counter_;
    a.motion_id = next_motion_id_++;
    active_ = std::move(a);

    GenerationRequest req{cmd.prompt, static_cast<double>(cmd.cfg_scale), cmd.num_steps, cmd.requested_frames};
    const auto gen = active_->generation;
    const auto id = active_->motion_id;
    net::post(*shared_->workers, [self = shared_from_this(), req = std::move(req), gen, id] {
      auto result = std::make_shared<Generated>();
      try {
        const auto clip = self->shared_->backend->generate(req);
        result->chunks = wire::make_chunks(clip, id, self->shared_->chunk.chunk_frames);
        result->total = static_cast<std::uint32_t>(clip.size());
        result->fps = clip.fps;
      } catch (const Error& e) {
        result->error.emplace(e.code() == ErrorCode::UnknownPrompt ? ErrorCode::UnknownPrompt
                                                                   : ErrorCode::BackendFailure,
                              e.what());
      } catch (const std::exception& e) {
        result->error.emplace(ErrorCode::BackendFailure, e.what());
      }
      net::post(self->strand_, [self, gen, result] { self->on_generated(gen, *result); });
    });
  }

  void on_generated(std::uint64_t gen, Generated& g) {
    if (closed_ || !active_ || active_->generation != gen) return;
    if (g.error) {
      active_.reset();
      send_error(g.error->first, g.error->second);
      return;
    }
    active_->generating = false;
    active_->chunks = std::move(g.chunks);
    active_->total = g.total;
    active_->fps = g.fps;
    active_->t0 = std::chrono::steady_clock::now();
    pump();
  }

  void pump() {
    if (closed_ || !active_ || active_->generating) return;
    auto& a = *active_;
    while (true) {
      if (a.next > a.chunks.size()) {
        active_.reset();
        return;
      }
      if (shared_->chunk.pacing == Pacing::Realtime) {
        const double due_frame = a.next < a.chunks.size() ? a.chunks[a.next].start_frame : a.total;
        const auto deadline = a.t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                         std::chrono::duration<double>(due_frame / a.fps));
        if (std::chrono::steady_clock::now() < deadline) {
          timer_.expires_at(deadline);
          timer_.async_wait([self = shared_from_this(), gen = a.generation](boost::system::error_code ec) {
            if (ec || !self->active_ || self->active_->generation != gen) return;
            self->pump();
          });
          return;
        }
      }
      if (queue_.size() >= shared_->max_queued) return;  // resumed when a write completes
      if (a.next < a.chunks.size()) {
        enqueue(std::move(a.chunks[a.next]), a.generation);
      } else {
        enqueue(wire::EndOfMotion{a.motion_id, a.total}, a.generation);
      }
      ++a.next;
    }
  }

  void enqueue(const wire::Message& m, std::uint64_t generation = 0) {
    if (closed_) return;
    queue_.push_back({std::make_shared<const Bytes>(wire::encode_message(m)), generation});
    do_write();
  }

  void do_write() {
    if (writing_ || closed_ || queue_.empty()) return;
    writing_ = true;
    auto bytes = queue_.front().bytes;
    queue_.pop_front();
    write_raw(std::move(bytes), [self = shared_from_this()](boost::system::error_code ec) {
      self->writing_ = false;
      if (ec) {
        self->shutdown();
        return;
      }
      if (self->close_after_flush_ && self->queue_.empty()) {
        self->shutdown();
        return;
      }
      self->do_write();
      self->pump();
    });
  }

  std::shared_ptr<const ServerShared> shared_;
  net::steady_timer timer_;
  std::deque<Outgoing> queue_;
  bool writing_ = false;
  bool closed_ = false;
  bool close_after_flush_ = false;
  std::optional<Active> active_;
  std::uint64_t generation_counter_ = 0;
  std::uint32_t next_motion_id_ = 1;
};

/// One message per binary WebSocket frame. A frame that fails to decode is
/// answered with ProtocolViolation; the connection stays usable.
class WebSocketSession final : public Session {
 public:
  WebSocketSession(std::shared_ptr<const ServerShared> shared, tcp::socket socket)
      : Session(std::move(shared), socket.get_executor()), ws_(std::move(socket)) {}

  void start() override {
    ws_.binary(true);
    ws_.read_message_max(wire::kHeaderSize + wire::kMaxPayload);
    ws_.async_accept([self = shared_from_this(), this](beast::error_code ec) {
      if (ec) {
        shutdown();
        return;
      }
      do_read();
    });
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
      if (ec) {
        shutdown();
        return;
      }
      const auto data = buffer_.cdata();
      const std::span<const std::uint8_t> bytes(static_cast<const std::uint8_t*>(data.data()), data.size());
      try {
        const auto msg = wire::decode_message(bytes);
        buffer_.consume(buffer_.size());
        handle(msg);
      } catch (const Error& e) {
        buffer_.consume(buffer_.size());
        send_error(ErrorCode::ProtocolViolation, e.what());
      }
      if (!closed()) do_read();
    });
  }

  void write_raw(std::shared_ptr<const Bytes> bytes, WriteHandler done) override {
    ws_.async_write(net::buffer(*bytes),
                    [bytes, done = std::move(done)](beast::error_code ec, std::size_t) { done(ec); });
  }

  void close_transport() override {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).close(ec);
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
};

/// Messages back to back on a byte stream. A bad header loses framing, so
/// the server reports ProtocolViolation and closes.
class TcpSession final : public Session {
 public:
  TcpSession(std::shared_ptr<const ServerShared> shared, tcp::socket socket)
      : Session(std::move(shared), socket.get_executor()), socket_(std::move(socket)) {}

  void start() override {
    net::dispatch(strand_, [self = shared_from_this(), this] { do_read(); });
  }

 private:
  void do_read() {
    socket_.async_read_some(net::buffer(read_buf_), [self = shared_from_this(), this](boost::system::error_code ec,
                                                                                       std::size_t n) {
      if (ec) {
        shutdown();
        return;
      }
      framer_.feed(std::span(read_buf_.data(), n));
      try {
        while (auto msg = framer_.next()) {
          handle(*msg);
          if (closed()) return;
        }
      } catch (const Error& e) {
        send_error(ErrorCode::ProtocolViolation, e.what());
        close_after_flush();
        return;
      }
      do_read();
    });
  }

  void write_raw(std::shared_ptr<const Bytes> bytes, WriteHandler done) override {
    net::async_write(socket_, net::buffer(*bytes),
                     [bytes, done = std::move(done)](boost::system::error_code ec, std::size_t) { done(ec); });
  }

  void close_transport() override {
    boost::system::error_code ec;
    socket_.shutdown(tcp::socket::shutdown_both, ec);
    socket_.close(ec);
  }

  tcp::socket socket_;
  std::array<std::uint8_t, 64 * 1024> read_buf_{};
  wire::Framer framer_;
};

}  // namespace detail

class Server {
 public:
  Server(ServerConfig cfg, std::shared_ptr<const GeneratorBackend> backend)
      : cfg_(std::move(cfg)), workers_(static_cast<std::size_t>(std::max(1, cfg_.worker_threads))), acceptor_(ioc_) {
    cfg_.validate();
    require(backend != nullptr, ErrorCode::InvalidArgument, "server needs a backend");
    auto shared = std::make_shared<detail::ServerShared>();
    shared->backend = std::move(backend);
    shared->chunk = cfg_.chunk;
    shared->max_queued = cfg_.max_queued;
    shared->workers = &workers_;
    shared_ = std::move(shared);
  }

  ~Server() { stop(); }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds, listens and starts the I/O threads. Returns once the port is
  /// open.
  void start() {
    require(!started_, ErrorCode::InvalidArgument, "server already started");
    boost::system::error_code ec;
    const auto addr = net::ip::make_address(cfg_.host, ec);
    tcp::endpoint ep;
    if (ec) {
      tcp::resolver resolver(ioc_);
      const auto results = resolver.resolve(cfg_.host, std::to_string(cfg_.port), ec);
      require(!ec && !results.empty(), ErrorCode::Connection, "cannot resolve bind host " + cfg_.host);
      ep = results.begin()->endpoint();
    } else {
      ep = tcp::endpoint(addr, cfg_.port);
    }
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    require(!ec, ErrorCode::Connection, "cannot listen on " + cfg_.host + ":" + std::to_string(cfg_.port) + ": " +
                                            ec.message());
    port_ = acceptor_.local_endpoint().port();
    started_ = true;
    do_accept();
    for (int i = 0; i < cfg_.io_threads; ++i) threads_.emplace_back([this] { ioc_.run(); });
  }

  std::uint16_t port() const { return port_; }
  const ServerConfig& config() const { return cfg_; }

  /// Stops on SIGINT or SIGTERM.
  void stop_on_signals() {
    signals_.emplace(ioc_, SIGINT, SIGTERM);
    signals_->async_wait([this](boost::system::error_code ec, int) {
      if (!ec) request_stop();
    });
  }

  /// Blocks until the I/O threads exit.
  void wait() {
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
  }

  void stop() {
    if (!started_ || stopped_) return;
    request_stop();
    wait();
    workers_.join();
    stopped_ = true;
  }

 private:
  void request_stop() {
    net::post(ioc_, [this] {
      boost::system::error_code ec;
      acceptor_.close(ec);
      if (signals_) signals_->cancel(ec);
    });
    ioc_.stop();
  }

  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) {
        if (acceptor_.is_open()) do_accept();
        return;
      }
      socket.set_option(tcp::no_delay(true), ec);
      std::shared_ptr<detail::Session> session;
      if (cfg_.transport == Transport::WebSocket) {
        session = std::make_shared<detail::WebSocketSession>(shared_, std::move(socket));
      } else {
        session = std::make_shared<detail::TcpSession>(shared_, std::move(socket));
      }
      session->start();
      do_accept();
    });
  }

  ServerConfig cfg_;
  net::io_context ioc_;
  net::thread_pool workers_;
  tcp::acceptor acceptor_;
  std::optional<net::signal_set> signals_;
  std::shared_ptr<const detail::ServerShared> shared_;
  std::vector<std::thread> threads_;
  std::uint16_t port_ = 0;
  bool started_ = false;
  bool stopped_ = false;
};

}  // namespace echo::stream
