#pragma once

// .emc clip files and CSV import/export.
//
// .emc layout (little-endian):
//   "EMC1" | frame_dim u16 (=38) | num_frames u32 | fps u8 | reserved[3]
//   | stats flag u8 | [38 f32 mean, 38 f32 std] | num_frames x 38 f32 row-major

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "echo/bytes.hpp"
#include "echo/motion/clip.hpp"
#include "echo/motion/norm.hpp"
#include "echo/text.hpp"

namespace echo {

inline constexpr char kEmcMagic[4] = {'E', 'M', 'C', '1'};

struct EmcFile {
  MotionClip clip;
  std::optional<NormStats> stats;
};

inline std::uint8_t fps_to_u8(double fps) {
  const double rounded = std::round(fps);
  require(rounded >= 1.0 && rounded <= 255.0 && rounded == fps, ErrorCode::Format,
          "fps must be an integer in [1, 255] to be stored");
  return static_cast<std::uint8_t>(rounded);
}

inline Bytes encode_emc(const MotionClip& clip, const std::optional<NormStats>& stats = std::nullopt) {
  Bytes out;
  out.reserve(15 + (stats ? 2 * kFrameDim * 4 : 0) + clip.size() * kFrameDim * 4);
  ByteWriter w(out);
  w.raw(std::string_view(kEmcMagic, 4));
  w.u16(static_cast<std::uint16_t>(kFrameDim));
  w.u32(static_cast<std::uint32_t>(clip.size()));
  w.u8(fps_to_u8(clip.fps));
  w.u8(0);
  w.u8(0);
  w.u8(0);
  w.u8(stats ? 1 : 0);
  if (stats) {
    for (double m : stats->mean) w.f32(static_cast<float>(m));
    for (double s : stats->std) w.f32(static_cast<float>(s));
  }
  for (const auto& f : clip.frames) {
    for (double v : f.values) w.f32(static_cast<float>(v));
  }
  return out;
}

inline EmcFile decode_emc(std::span<const std::uint8_t> data) {
  ByteReader r(data, ErrorCode::Format);
  const auto magic = r.raw(4);
  require(std::equal(magic.begin(), magic.end(), kEmcMagic), ErrorCode::BadMagic,
          "not an .emc file (bad magic)");
  const auto dim = r.u16();
  require(dim == kFrameDim, ErrorCode::Format, "unsupported frame_dim " + std::to_string(dim));
  const auto num_frames = r.u32();
  const auto fps = r.u8();
  require(fps > 0, ErrorCode::Format, ".emc fps must be positive");
  r.raw(3);
  const auto flag = r.u8();
  require(flag <= 1, ErrorCode::Format, "invalid stats flag");

  EmcFile file;
  file.clip.fps = fps;
  if (flag == 1) {
    NormStats s;
    for (auto& m : s.mean) m = r.f32();
    for (auto& d : s.std) d = r.f32();
    file.stats = s;
  }
  require(r.remaining() == static_cast<std::size_t>(num_frames) * kFrameDim * 4, ErrorCode::Format,
          ".emc payload size does not match num_frames");
  file.clip.frames.resize(num_frames);
  for (auto& f : file.clip.frames) {
    for (auto& v : f.values) v = r.f32();
  }
  return file;
}

inline void write_emc(const std::string& path, const MotionClip& clip,
                      const std::optional<NormStats>& stats = std::nullopt) {
  write_file_bytes(path, encode_emc(clip, stats));
}

inline EmcFile read_emc(const std::string& path) { return decode_emc(read_file_bytes(path)); }

inline std::string csv_header() {
  std::string h;
  char buf[8];
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    std::snprintf(buf, sizeof(buf), "j%02zu,", j);
    h += buf;
  }
  h += "vx,vy,h";
  for (int i = 0; i < 6; ++i) h += ",r" + std::to_string(i);
  return h;
}

/// Values are written as the shortest f32 text that round-trips, so
/// .emc -> CSV -> .emc is lossless.
inline std::string clip_to_csv(const MotionClip& clip) {
  std::string out = csv_header() + "\n";
  for (const auto& f : clip.frames) {
    for (std::size_t d = 0; d < kFrameDim; ++d) {
      if (d) out += ',';
      out += text::format_number(static_cast<float>(f.values[d]));
    }
    out += '\n';
  }
  return out;
}

inline MotionClip clip_from_csv(std::string_view csv, double fps = kDefaultFps) {
  MotionClip clip;
  clip.fps = fps;
  std::istringstream in{std::string(csv)};
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    if (!header_seen) {
      require(text::trim(line) == csv_header(), ErrorCode::Format, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    const auto cells = text::split(line, ',');
    require(cells.size() == kFrameDim, ErrorCode::Format,
            "CSV row has " + std::to_string(cells.size()) + " columns, expected 38");
    MotionFrame f;
    for (std::size_t d = 0; d < kFrameDim; ++d) f.values[d] = text::parse_number<float>(cells[d]);
    clip.frames.push_back(f);
  }
  require(header_seen, ErrorCode::Format, "CSV is empty");
  return clip;
}

inline void write_csv(const std::string& path, const MotionClip& clip) {
  const auto s = clip_to_csv(clip);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

inline MotionClip read_csv(const std::string& path, double fps = kDefaultFps) {
  const auto bytes = read_file_bytes(path);
  return clip_from_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), fps);
}

/// Loads either format, chosen by extension.
inline EmcFile read_clip_file(const std::string& path, double csv_fps = kDefaultFps) {
  if (text::ends_with(path, ".csv")) return {read_csv(path, csv_fps), std::nullopt};
  return read_emc(path);
}

}  // namespace echo
