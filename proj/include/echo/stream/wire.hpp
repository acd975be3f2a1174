#pragma once

// Binary message codec. Every message is a 10-byte header followed by its
// payload; all integers and floats are little-endian.
//
//   header       "ECHO" | version u8 (1) | type u8 | payload_len u32
//   TextCommand  prompt_len u16 | prompt | cfg_scale f32 | num_steps u16 | requested_frames u16
//   MotionChunk  motion_id u32 | start_frame u32 | frame_count u16 | fps u8 | frame_count x 38 f32
//   EndOfMotion  motion_id u32 | total_frames u32
//   ErrorMsg     code u16 | msg_len u16 | text
//   Heartbeat, Ack: empty

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "echo/bytes.hpp"
#include "echo/error.hpp"
#include "echo/motion/clip.hpp"

namespace echo::wire {

inline constexpr std::array<std::uint8_t, 4> kMagic{'E', 'C', 'H', 'O'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::size_t kChunkHeaderSize = 11;
inline constexpr std::size_t kFrameBytes = kFrameDim * 4;
/// Upper bound accepted by the stream framer; a chunk of 65535 frames is
/// about 10 MB.
inline constexpr std::uint32_t kMaxPayload = 16u << 20;

enum class MessageType : std::uint8_t {
  TextCommand = 1,
  MotionChunk = 2,
  EndOfMotion = 3,
  Heartbeat = 4,
  ErrorMsg = 5,
  Ack = 6,
};

enum class WireError : std::uint16_t {
  UnknownPrompt = 1,
  BackendFailure = 2,
  ProtocolViolation = 3,
  Cancelled = 4,
};

using WireFrame = std::array<float, kFrameDim>;

struct TextCommand {
  std::string prompt;
  float cfg_scale = 2.5f;
  std::uint16_t num_steps = 10;
  std::uint16_t requested_frames = 0;  // 0 = backend default
  bool operator==(const TextCommand&) const = default;
};

struct MotionChunk {
  std::uint32_t motion_id = 0;
  std::uint32_t start_frame = 0;
  std::uint8_t fps = 50;
  std::vector<WireFrame> frames;
  bool operator==(const MotionChunk&) const = default;
};

struct EndOfMotion {
  std::uint32_t motion_id = 0;
  std::uint32_t total_frames = 0;
  bool operator==(const EndOfMotion&) const = default;
};

struct Heartbeat {
  bool operator==(const Heartbeat&) const = default;
};

struct Ack {
  bool operator==(const Ack&) const = default;
};

struct ErrorMsg {
  std::uint16_t code = 0;  // a WireError value; others pass through
  std::string message;
  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<TextCommand, MotionChunk, EndOfMotion, Heartbeat, ErrorMsg, Ack>;

inline MessageType type_of(const Message& m) {
  return std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TextCommand>) return MessageType::TextCommand;
        else if constexpr (std::is_same_v<T, MotionChunk>) return MessageType::MotionChunk;
        else if constexpr (std::is_same_v<T, EndOfMotion>) return MessageType::EndOfMotion;
        else if constexpr (std::is_same_v<T, Heartbeat>) return MessageType::Heartbeat;
        else if constexpr (std::is_same_v<T, ErrorMsg>) return MessageType::ErrorMsg;
        else return MessageType::Ack;
      },
      m);
}

inline const char* type_name(MessageType t) {
  switch (t) {
    case MessageType::TextCommand: return "TextCommand";
    case MessageType::MotionChunk: return "MotionChunk";
    case MessageType::EndOfMotion: return "EndOfMotion";
    case MessageType::Heartbeat: return "Heartbeat";
    case MessageType::ErrorMsg: return "ErrorMsg";
    case MessageType::Ack: return "Ack";
  }
  return "?";
}

/// Maps a wire error code to the library error it reports.
inline ErrorCode error_code_of(std::uint16_t wire_code) {
  switch (static_cast<WireError>(wire_code)) {
    case WireError::UnknownPrompt: return ErrorCode::UnknownPrompt;
    case WireError::BackendFailure: return ErrorCode::BackendFailure;
    case WireError::ProtocolViolation: return ErrorCode::ProtocolViolation;
    case WireError::Cancelled: return ErrorCode::Cancelled;
  }
  return ErrorCode::BackendFailure;
}

inline std::uint16_t wire_code_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownPrompt: return static_cast<std::uint16_t>(WireError::UnknownPrompt);
    case ErrorCode::ProtocolViolation:
    case ErrorCode::BadMagic:
    case ErrorCode::BadVersion:
    case ErrorCode::Truncated:
    case ErrorCode::UnknownType:
    case ErrorCode::Malformed: return static_cast<std::uint16_t>(WireError::ProtocolViolation);
    case ErrorCode::Cancelled: return static_cast<std::uint16_t>(WireError::Cancelled);
    default: return static_cast<std::uint16_t>(WireError::BackendFailure);
  }
}

namespace detail {

inline std::uint16_t checked_u16(std::size_t n, const char* what) {
  require(n <= 0xFFFF, ErrorCode::InvalidArgument, std::string(what) + " exceeds 65535");
  return static_cast<std::uint16_t>(n);
}

inline void encode_payload(ByteWriter& w, const TextCommand& m) {
  w.u16(checked_u16(m.prompt.size(), "prompt length"));
  w.raw(m.prompt);
  w.f32(m.cfg_scale);
  w.u16(m.num_steps);
  w.u16(m.requested_frames);
}

inline void encode_payload(ByteWriter& w, const MotionChunk& m) {
  w.u32(m.motion_id);
  w.u32(m.start_frame);
  w.u16(checked_u16(m.frames.size(), "chunk frame count"));
  w.u8(m.fps);
  for (const auto& f : m.frames) {
    for (float v : f) w.f32(v);
  }
}

inline void encode_payload(ByteWriter& w, const EndOfMotion& m) {
  w.u32(m.motion_id);
  w.u32(m.total_frames);
}

inline void encode_payload(ByteWriter& w, const ErrorMsg& m) {
  w.u16(m.code);
  w.u16(checked_u16(m.message.size(), "error text length"));
  w.raw(m.message);
}

inline void encode_payload(ByteWriter&, const Heartbeat&) {}
inline void encode_payload(ByteWriter&, const Ack&) {}

}  // namespace detail

inline Bytes encode_message(const Message& m) {
  Bytes payload;
  ByteWriter pw(payload);
  std::visit([&](const auto& v) { detail::encode_payload(pw, v); }, m);
  require(payload.size() <= kMaxPayload, ErrorCode::InvalidArgument, "message payload too large");

  Bytes out;
  out.reserve(kHeaderSize + payload.size());
  ByteWriter w(out);
  w.raw(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(type_of(m)));
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.raw(payload);
  return out;
}

struct Header {
  MessageType type = MessageType::Heartbeat;
  std::uint32_t payload_len = 0;
};

inline Header decode_header(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kHeaderSize, ErrorCode::Truncated, "message shorter than its header");
  ByteReader r(bytes.first(kHeaderSize));
  const auto magic = r.raw(4);
  require(std::equal(magic.begin(), magic.end(), kMagic.begin()), ErrorCode::BadMagic, "bad magic");
  const auto version = r.u8();
  require(version == kVersion, ErrorCode::BadVersion, "unsupported protocol version " + std::to_string(version));
  const auto type = r.u8();
  require(type >= 1 && type <= 6, ErrorCode::UnknownType, "unknown message type " + std::to_string(type));
  Header h;
  h.type = static_cast<MessageType>(type);
  h.payload_len = r.u32();
  return h;
}

/// Decodes a payload whose length is already known to match the header.
inline Message decode_payload(MessageType type, std::span<const std::uint8_t> payload) {
  // Inconsistencies inside a complete payload are malformed, not truncated.
  ByteReader r(payload, ErrorCode::Malformed);
  Message m;
  switch (type) {
    case MessageType::TextCommand: {
      TextCommand c;
      c.prompt = r.str(r.u16());
      c.cfg_scale = r.f32();
      c.num_steps = r.u16();
      c.requested_frames = r.u16();
      m = std::move(c);
      break;
    }
    case MessageType::MotionChunk: {
      MotionChunk c;
      c.motion_id = r.u32();
      c.start_frame = r.u32();
      const auto count = r.u16();
      c.fps = r.u8();
      require(r.remaining() == count * kFrameBytes, ErrorCode::Malformed,
              "chunk frame count disagrees with payload length");
      c.frames.resize(count);
      for (auto& f : c.frames) {
        for (auto& v : f) v = r.f32();
      }
      m = std::move(c);
      break;
    }
    case MessageType::EndOfMotion: {
      EndOfMotion e;
      e.motion_id = r.u32();
      e.total_frames = r.u32();
      m = e;
      break;
    }
    case MessageType::Heartbeat: m = Heartbeat{}; break;
    case MessageType::ErrorMsg: {
      ErrorMsg e;
      e.code = r.u16();
      e.message = r.str(r.u16());
      m = std::move(e);
      break;
    }
    case MessageType::Ack: m = Ack{}; break;
  }
  require(r.remaining() == 0, ErrorCode::Malformed, "trailing bytes after payload");
  return m;
}

/// Decodes exactly one message occupying the whole buffer.
inline Message decode_message(std::span<const std::uint8_t> bytes) {
  const auto h = decode_header(bytes);
  const auto body = bytes.subspan(kHeaderSize);
  require(body.size() >= h.payload_len, ErrorCode::Truncated, "payload shorter than its declared length");
  require(body.size() == h.payload_len, ErrorCode::Malformed, "bytes after the declared payload");
  return decode_payload(h.type, body);
}

/// Splits a byte stream into messages. A decode error leaves the framer
/// unusable since message boundaries are lost.
class Framer {
 public:
  void feed(std::span<const std::uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

  std::optional<Message> next() {
    if (buf_.size() < kHeaderSize) return std::nullopt;
    const Bytes head(buf_.begin(), buf_.begin() + kHeaderSize);
    const auto h = decode_header(head);
    require(h.payload_len <= kMaxPayload, ErrorCode::Malformed, "declared payload too large");
    if (buf_.size() < kHeaderSize + h.payload_len) return std::nullopt;
    const Bytes payload(buf_.begin() + kHeaderSize, buf_.begin() + kHeaderSize + h.payload_len);
    buf_.erase(buf_.begin(), buf_.begin() + kHeaderSize + h.payload_len);
    return decode_payload(h.type, payload);
  }

  std::size_t buffered() const { return buf_.size(); }

 private:
  std::deque<std::uint8_t> buf_;
};

// Clip <-> chunk conversion.

inline WireFrame to_wire(const MotionFrame& f) {
  WireFrame w;
  for (std::size_t i = 0; i < kFrameDim; ++i) w[i] = static_cast<float>(f.values[i]);
  return w;
}

inline MotionFrame from_wire(const WireFrame& w) {
  MotionFrame f;
  for (std::size_t i = 0; i < kFrameDim; ++i) f.values[i] = static_cast<double>(w[i]);
  return f;
}

inline std::uint8_t wire_fps(double fps) {
  require(fps >= 1.0 && fps <= 255.0 && fps == std::floor(fps), ErrorCode::InvalidArgument,
          "streamed clips need an integer fps in [1, 255]");
  return static_cast<std::uint8_t>(fps);
}

/// Splits a clip into chunks of at most `chunk_frames` frames.
inline std::vector<MotionChunk> make_chunks(const MotionClip& clip, std::uint32_t motion_id,
                                            std::size_t chunk_frames) {
  require(chunk_frames >= 1 && chunk_frames <= 0xFFFF, ErrorCode::InvalidArgument,
          "chunk size must lie in [1, 65535]");
  validate_clip(clip);
  const auto fps = wire_fps(clip.fps);
  std::vector<MotionChunk> chunks;
  for (std::size_t start = 0; start < clip.size(); start += chunk_frames) {
    MotionChunk c;
    c.motion_id = motion_id;
    c.start_frame = static_cast<std::uint32_t>(start);
    c.fps = fps;
    const std::size_t end = std::min(clip.size(), start + chunk_frames);
    for (std::size_t t = start; t < end; ++t) c.frames.push_back(to_wire(clip.frames[t]));
    chunks.push_back(std::move(c));
  }
  return chunks;
}

/// Rebuilds one motion from its chunks. Chunks must arrive in order with no
/// gap or overlap; anything else is a protocol violation.
class ChunkAssembler {
 public:
  void add(const MotionChunk& c) {
    if (!motion_id_) {
      motion_id_ = c.motion_id;
      clip_.fps = c.fps;
    }
    require(!done_, ErrorCode::ProtocolViolation, "chunk after end of motion");
    require(c.motion_id == *motion_id_, ErrorCode::ProtocolViolation,
            "chunk for motion " + std::to_string(c.motion_id) + " while assembling " + std::to_string(*motion_id_));
    require(c.start_frame == clip_.size(), ErrorCode::ProtocolViolation,
            "chunk starts at frame " + std::to_string(c.start_frame) + ", expected " +
                std::to_string(clip_.size()));
    require(!c.frames.empty(), ErrorCode::ProtocolViolation, "empty chunk");
    require(static_cast<double>(c.fps) == clip_.fps, ErrorCode::ProtocolViolation, "fps changed mid-motion");
    for (const auto& f : c.frames) clip_.frames.push_back(from_wire(f));
  }

  void finish(const EndOfMotion& e) {
    require(motion_id_.has_value() && e.motion_id == *motion_id_, ErrorCode::ProtocolViolation,
            "end of motion for an unknown motion id");
    require(e.total_frames == clip_.size(), ErrorCode::ProtocolViolation,
            "end of motion reports " + std::to_string(e.total_frames) + " frames, received " +
                std::to_string(clip_.size()));
    done_ = true;
  }

  bool done() const { return done_; }
  std::optional<std::uint32_t> motion_id() const { return motion_id_; }
  const MotionClip& clip() const { return clip_; }
  MotionClip take() { return std::move(clip_); }

 private:
  std::optional<std::uint32_t> motion_id_;
  MotionClip clip_;
  bool done_ = false;
};

}  // namespace echo::wire
