#pragma once

// Motion sources for the server: a prompt-indexed clip library and the
// Gaussian-oracle diffusion sampler.

#include <atomic>
#include <cctype>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "echo/diffusion/denoiser.hpp"
#include "echo/diffusion/sampler.hpp"
#include "echo/error.hpp"
#include "echo/motion/clip.hpp"
#include "echo/motion/io.hpp"
#include "echo/motion/joints.hpp"
#include "echo/text.hpp"

namespace echo::stream {

struct GenerationRequest {
  std::string prompt;
  double cfg_scale = 2.5;
  int num_steps = 10;
  std::size_t requested_frames = 0;  // 0 = backend default
};

/// Implementations must be safe to call from several threads at once.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual MotionClip generate(const GenerationRequest& req) const = 0;
  virtual std::string name() const = 0;
};

/// Lowercase, with runs of whitespace collapsed to one space and trimmed.
inline std::string normalize_prompt(std::string_view prompt) {
  std::string out;
  for (char c : text::trim(prompt)) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  return out;
}

/// Serves stored clips verbatim. Lookup tries the exact prompt first, then
/// the normalized form. requested_frames is ignored.
class LibraryBackend final : public GeneratorBackend {
 public:
  void add(const std::string& prompt, MotionClip clip) {
    require(!prompt.empty(), ErrorCode::InvalidArgument, "library prompt is empty");
    validate_clip(clip);
    require(!clip.empty(), ErrorCode::EmptyInput, "library clip for '" + prompt + "' is empty");
    clip.prompt = prompt;
    auto stored = std::make_shared<const MotionClip>(std::move(clip));
    exact_[prompt] = stored;
    normalized_.emplace(normalize_prompt(prompt), stored);
  }

  std::shared_ptr<const MotionClip> find(std::string_view prompt) const {
    if (auto it = exact_.find(std::string(prompt)); it != exact_.end()) return it->second;
    if (auto it = normalized_.find(normalize_prompt(prompt)); it != normalized_.end()) return it->second;
    return nullptr;
  }

  MotionClip generate(const GenerationRequest& req) const override {
    const auto clip = find(req.prompt);
    require(clip != nullptr, ErrorCode::UnknownPrompt, "no clip for prompt '" + req.prompt + "'");
    return *clip;
  }

  std::string name() const override { return "library"; }
  std::size_t size() const { return exact_.size(); }

  std::vector<std::string> prompts() const {
    std::vector<std::string> out;
    for (const auto& [p, _] : exact_) out.push_back(p);
    return out;
  }

  /// Loads `prompts.tsv` (`file<TAB>prompt` per line) when present;
  /// otherwise every .emc/.csv clip is keyed by its file stem with '_'
  /// read as a space.
  static LibraryBackend from_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    require(fs::is_directory(dir), ErrorCode::Io, dir + " is not a directory");
    LibraryBackend lib;
    const auto tsv = fs::path(dir) / "prompts.tsv";
    if (fs::exists(tsv)) {
      for (const auto& line : text::read_lines(tsv.string())) {
        if (text::is_comment(line)) continue;
        const auto tab = line.find('\t');
        require(tab != std::string::npos, ErrorCode::Format, "prompts.tsv line needs `file<TAB>prompt`: " + line);
        const auto file = std::string(text::trim(std::string_view(line).substr(0, tab)));
        const auto prompt = std::string(text::trim(std::string_view(line).substr(tab + 1)));
        lib.add(prompt, read_clip_file((fs::path(dir) / file).string()).clip);
      }
    } else {
      std::vector<fs::path> files;
      for (const auto& de : fs::directory_iterator(dir)) {
        const auto ext = de.path().extension().string();
        if (de.is_regular_file() && (ext == ".emc" || ext == ".csv")) files.push_back(de.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        auto prompt = f.stem().string();
        std::replace(prompt.begin(), prompt.end(), '_', ' ');
        lib.add(prompt, read_clip_file(f.string()).clip);
      }
    }
    require(lib.size() > 0, ErrorCode::EmptyLibrary, "no clips found in " + dir);
    return lib;
  }

 private:
  std::map<std::string, std::shared_ptr<const MotionClip>> exact_;
  std::map<std::string, std::shared_ptr<const MotionClip>> normalized_;
};

/// Per-dimension data distribution for the oracle: joints at their range
/// centres, standing height, identity root orientation.
inline Eigen::VectorXd default_oracle_mean() {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kFrameDim);
  for (std::size_t j = 0; j < kNumJoints; ++j) mean(static_cast<Eigen::Index>(j)) = kG1JointLimits[j].center();
  mean(kRootHeightOffset) = 0.75;
  mean(kRot6dOffset + 0) = 1.0;
  mean(kRot6dOffset + 4) = 1.0;
  return mean;
}

/// Samples from the exact-posterior Gaussian denoiser; every request draws
/// a fresh seed so repeated prompts differ.
class OracleBackend final : public GeneratorBackend {
 public:
  struct Options {
    double std = 0.05;
    std::size_t default_frames = 100;
    double fps = kDefaultFps;
    diffusion::Scheduler scheduler = diffusion::Scheduler::Ddim;
    std::uint64_t seed = 0;
  };

  OracleBackend() : OracleBackend(Options{}) {}

  explicit OracleBackend(Options opt)
      : opt_(opt),
        sched_(diffusion::NoiseSchedule::linear()),
        denoiser_(default_oracle_mean(), Eigen::VectorXd::Constant(kFrameDim, opt.std * opt.std), sched_),
        next_seed_(opt.seed) {
    require(opt.std > 0.0, ErrorCode::InvalidArgument, "oracle std must be positive");
    require(opt.default_frames >= 1, ErrorCode::InvalidArgument, "oracle default frames must be >= 1");
  }

  MotionClip generate(const GenerationRequest& req) const override {
    diffusion::SamplerConfig cfg;
    cfg.scheduler = opt_.scheduler;
    cfg.num_steps = req.num_steps;
    cfg.cfg_scale = req.cfg_scale;
    cfg.seed = next_seed_.fetch_add(1);
    const std::size_t frames = req.requested_frames > 0 ? req.requested_frames : opt_.default_frames;
    auto clip = diffusion::sample(denoiser_, req.prompt, frames, cfg, sched_, NormStats::identity(), opt_.fps).clip;
    return clip;
  }

  std::string name() const override { return "oracle"; }

 private:
  Options opt_;
  diffusion::NoiseSchedule sched_;
  diffusion::GaussianOracleDenoiser denoiser_;
  mutable std::atomic<std::uint64_t> next_seed_;
};

}  // namespace echo::stream
