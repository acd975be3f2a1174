#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "echo/error.hpp"
#include "echo/text.hpp"

namespace echo::policy {

/// Uniform range drawn `count` times independently (e.g. one offset per
/// joint). Scale entries multiply a nominal value; the rest are additive.
struct RandomizationEntry {
  std::string name;
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 1;
};

struct RandomizationSpec {
  std::vector<RandomizationEntry> entries;

  static RandomizationSpec defaults() {
    return {{
        {"pelvis_mass_scale", 0.9, 1.1, 1},
        {"torso_mass_scale", 0.9, 1.1, 1},
        {"com_offset", -0.02, 0.02, 3},
        {"ankle_friction_scale", 0.5, 1.5, 1},
        {"solref_time", 0.015, 0.03, 1},
        {"solref_damping", 0.5, 2.0, 1},
        {"joint_offset", -0.01, 0.01, 29},
        {"motor_stiffness_scale", 0.8, 1.2, 1},
        {"motor_damping_scale", 0.8, 1.2, 1},
        {"armature_scale", 0.75, 1.25, 1},
    }};
  }

  void validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      require(!e.name.empty(), ErrorCode::InvalidArgument, "randomization entry without a name");
      require(std::isfinite(e.low) && std::isfinite(e.high) && e.low <= e.high, ErrorCode::InvalidArgument,
              "randomization range for " + e.name + " needs low <= high");
      require(e.count >= 1, ErrorCode::InvalidArgument, "randomization count for " + e.name + " must be >= 1");
      for (std::size_t j = 0; j < i; ++j) {
        require(entries[j].name != e.name, ErrorCode::InvalidArgument, "duplicate randomization entry " + e.name);
      }
    }
  }
};

/// Config lines: `name low high [count]`; '#' comments.
inline RandomizationSpec parse_randomization(std::span<const std::string> lines) {
  RandomizationSpec spec;
  for (const auto& line : lines) {
    if (text::is_comment(line)) continue;
    const auto tok = text::tokens(text::strip_comment(line));
    require(tok.size() == 3 || tok.size() == 4, ErrorCode::Format,
            "randomization line needs `name low high [count]`: " + line);
    RandomizationEntry e{std::string(tok[0]), text::parse_number<double>(tok[1]),
                         text::parse_number<double>(tok[2]), 1};
    if (tok.size() == 4) e.count = text::parse_number<std::size_t>(tok[3]);
    spec.entries.push_back(std::move(e));
  }
  spec.validate();
  return spec;
}

inline RandomizationSpec load_randomization(const std::string& path) {
  const auto lines = text::read_lines(path);
  return parse_randomization(lines);
}

using RandomizationDraw = std::map<std::string, std::vector<double>>;

inline RandomizationDraw sample_randomization(const RandomizationSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  RandomizationDraw out;
  for (const auto& e : spec.entries) {
    auto& values = out[e.name];
    for (std::size_t k = 0; k < e.count; ++k) {
      if (e.low == e.high) {
        values.push_back(e.low);
        continue;
      }
      // uniform_real_distribution may return high through rounding.
      std::uniform_real_distribution<double> u(e.low, e.high);
      values.push_back(std::min(u(rng), e.high));
    }
  }
  return out;
}

inline RandomizationDraw sample_randomization(const RandomizationSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_randomization(spec, rng);
}

}  // namespace echo::policy
