// echo: command-line front end for clip conversion, evaluation, sampling,
// streaming and recovery retrieval.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "echo/diffusion/denoiser.hpp"
#include "echo/diffusion/sampler.hpp"
#include "echo/error.hpp"
#include "echo/metrics/embedding.hpp"
#include "echo/metrics/mpjpe.hpp"
#include "echo/metrics/safety.hpp"
#include "echo/metrics/trajectory.hpp"
#include "echo/motion/io.hpp"
#include "echo/recovery/recovery.hpp"
#include "echo/stream/backend.hpp"
#include "echo/stream/client.hpp"
#include "echo/stream/server.hpp"
#include "echo/text.hpp"

namespace {

using namespace echo;

std::string num(double v) { return text::format_number(v); }

void write_clip(const std::string& path, const MotionClip& clip, const std::optional<NormStats>& stats = {}) {
  if (text::ends_with(path, ".csv")) {
    write_csv(path, clip);
  } else {
    write_emc(path, clip, stats);
  }
}

std::vector<double> parse_list(const std::string& s, std::size_t expected, const char* what) {
  std::vector<double> out;
  for (auto field : text::split(s, ',')) out.push_back(text::parse_number<double>(field));
  require(out.size() == expected, ErrorCode::InvalidArgument,
          std::string(what) + " needs " + std::to_string(expected) + " comma-separated values");
  return out;
}

// convert

struct ConvertArgs {
  std::string in, out;
  double fps = kDefaultFps;
};

void add_convert(CLI::App& app, std::function<void()>& action) {
  auto args = std::make_shared<ConvertArgs>();
  auto* cmd = app.add_subcommand("convert", "Convert a clip between .emc and .csv");
  cmd->add_option("input", args->in, "Input clip (.emc or .csv)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out,-o", args->out, "Output clip; format follows the extension")->required();
  cmd->add_option("--fps", args->fps, "Frame rate assumed for CSV input");
  cmd->callback([args, &action] {
    action = [args] {
      const auto file = read_clip_file(args->in, args->fps);
      write_clip(args->out, file.clip, file.stats);
      std::cout << "frames=" << file.clip.size() << " fps=" << num(file.clip.fps) << " out=" << args->out << '\n';
    };
  });
}

// eval

struct EvalArgs {
  std::vector<std::string> clips;
  std::string limits;
  bool max_aggregation = false;
  std::string gen, gt, a, b, motion, text_emb, emb, actual, reference;
  int pool = 32;
  int pairs = 300;
  std::uint64_t seed = 0;
  int root = 0;
};

void add_eval(CLI::App& app, std::function<void()>& action) {
  auto args = std::make_shared<EvalArgs>();
  auto* eval = app.add_subcommand("eval", "Evaluation metrics");
  eval->require_subcommand(1);

  auto* mss = eval->add_subcommand("mss", "Motion safety score of one or more clips");
  mss->add_option("clips", args->clips, "Clips to score")->required()->check(CLI::ExistingFile);
  mss->add_option("--limits", args->limits, "Joint limits table (defaults to the built-in G1 table)")
      ->check(CLI::ExistingFile);
  mss->add_flag("--max", args->max_aggregation, "Aggregate violations by max instead of mean");
  mss->callback([args, &action] {
    action = [args] {
      auto limits = args->limits.empty() ? SafetyLimits::g1() : load_joint_limits(args->limits);
      if (args->max_aggregation) limits.aggregation = ViolationAggregation::Max;
      double sum = 0;
      for (const auto& path : args->clips) {
        const auto s = motion_safety_score(read_clip_file(path).clip, limits);
        sum += s.mss;
        std::cout << path << ": mss=" << num(s.mss) << " s_pos=" << num(s.s_pos) << " s_vel=" << num(s.s_vel)
                  << " s_acc=" << num(s.s_acc) << " v_pos=" << num(s.v_pos) << " v_vel=" << num(s.v_vel)
                  << " v_acc=" << num(s.v_acc) << '\n';
      }
      if (args->clips.size() > 1) std::cout << "mean_mss=" << num(sum / static_cast<double>(args->clips.size())) << '\n';
    };
  });

  auto* rtc = eval->add_subcommand("rtc", "Root trajectory consistency of a generated clip against a reference");
  rtc->add_option("generated", args->gen)->required()->check(CLI::ExistingFile);
  rtc->add_option("reference", args->gt)->required()->check(CLI::ExistingFile);
  rtc->callback([args, &action] {
    action = [args] {
      const auto s = root_trajectory_consistency(read_clip_file(args->gen).clip, read_clip_file(args->gt).clip);
      std::cout << "rtc=" << num(s.rtc) << " s_shape=" << num(s.s_shape) << " s_extent=" << num(s.s_extent)
                << " shape_error=" << num(s.shape_error) << " length_gen=" << num(s.length_gen)
                << " length_gt=" << num(s.length_gt) << '\n';
    };
  });

  auto* fid_cmd = eval->add_subcommand("fid", "Frechet distance between two embedding sets");
  fid_cmd->add_option("a", args->a)->required()->check(CLI::ExistingFile);
  fid_cmd->add_option("b", args->b)->required()->check(CLI::ExistingFile);
  fid_cmd->callback([args, &action] {
    action = [args] { std::cout << "fid=" << num(fid(read_embeddings(args->a), read_embeddings(args->b))) << '\n'; };
  });

  auto* rprec = eval->add_subcommand("rprec", "R-Precision of paired motion and text embeddings");
  rprec->add_option("motion", args->motion)->required()->check(CLI::ExistingFile);
  rprec->add_option("text", args->text_emb)->required()->check(CLI::ExistingFile);
  rprec->add_option("--pool", args->pool, "Candidate pool size")->check(CLI::PositiveNumber);
  rprec->add_option("--seed", args->seed);
  rprec->callback([args, &action] {
    action = [args] {
      const auto r = r_precision(read_embeddings(args->motion, EmbeddingRole::Motion),
                                 read_embeddings(args->text_emb, EmbeddingRole::Text), args->pool, args->seed);
      std::cout << "top1=" << num(r.top[0]) << " top2=" << num(r.top[1]) << " top3=" << num(r.top[2]) << '\n';
    };
  });

  auto* div = eval->add_subcommand("div", "Diversity of an embedding set");
  div->add_option("embeddings", args->emb)->required()->check(CLI::ExistingFile);
  div->add_option("--pairs", args->pairs, "Number of random pairs")->check(CLI::PositiveNumber);
  div->add_option("--seed", args->seed);
  div->callback([args, &action] {
    action = [args] {
      std::cout << "diversity=" << num(diversity(read_embeddings(args->emb), args->pairs, args->seed)) << '\n';
    };
  });

  auto* mm = eval->add_subcommand("mmdist", "Mean distance between paired motion and text embeddings");
  mm->add_option("motion", args->motion)->required()->check(CLI::ExistingFile);
  mm->add_option("text", args->text_emb)->required()->check(CLI::ExistingFile);
  mm->callback([args, &action] {
    action = [args] {
      std::cout << "mm_dist="
                << num(mm_dist(read_embeddings(args->motion, EmbeddingRole::Motion),
                               read_embeddings(args->text_emb, EmbeddingRole::Text)))
                << '\n';
    };
  });

  auto* mp = eval->add_subcommand("mpjpe", "Global and root-relative joint position error");
  mp->add_option("actual", args->actual)->required()->check(CLI::ExistingFile);
  mp->add_option("reference", args->reference)->required()->check(CLI::ExistingFile);
  mp->add_option("--root", args->root, "Keypoint column of the root")->check(CLI::NonNegativeNumber);
  mp->callback([args, &action] {
    action = [args] {
      const auto r = mpjpe(read_keypoints(args->actual), read_keypoints(args->reference), args->root);
      std::cout << "g_mpjpe_mm=" << num(r.global_mm) << " mpjpe_mm=" << num(r.local_mm) << '\n';
    };
  });
}

// sample

struct SampleArgs {
  std::string prompt, out, scheduler = "ddim";
  std::size_t frames = 100;
  int steps = 10;
  double cfg = 2.5, eta = 0.0, std = 0.05, fps = kDefaultFps;
  std::uint64_t seed = 0;
};

void add_sample(CLI::App& app, std::function<void()>& action) {
  auto args = std::make_shared<SampleArgs>();
  auto* cmd = app.add_subcommand("sample", "Sample a clip with the Gaussian-oracle denoiser");
  cmd->add_option("--prompt", args->prompt, "Condition tag")->required();
  cmd->add_option("--out,-o", args->out, "Output clip")->required();
  cmd->add_option("--frames", args->frames)->check(CLI::PositiveNumber);
  cmd->add_option("--steps", args->steps, "Denoising steps")->check(CLI::PositiveNumber);
  cmd->add_option("--cfg", args->cfg, "Guidance scale");
  cmd->add_option("--eta", args->eta, "DDIM stochasticity");
  cmd->add_option("--scheduler", args->scheduler, "ddim, ddpm or dpm-solver");
  cmd->add_option("--seed", args->seed);
  cmd->add_option("--std", args->std, "Per-dimension standard deviation of the oracle data")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--fps", args->fps);
  cmd->callback([args, &action] {
    action = [args] {
      const auto sched = diffusion::NoiseSchedule::linear();
      const diffusion::GaussianOracleDenoiser oracle(stream::default_oracle_mean(),
                                                     Eigen::VectorXd::Constant(kFrameDim, args->std * args->std), sched);
      diffusion::SamplerConfig cfg;
      cfg.scheduler = diffusion::parse_scheduler(args->scheduler);
      cfg.num_steps = args->steps;
      cfg.cfg_scale = args->cfg;
      cfg.eta = args->eta;
      cfg.seed = args->seed;
      const auto r = diffusion::sample(oracle, args->prompt, args->frames, cfg, sched, NormStats::identity(), args->fps);
      write_clip(args->out, r.clip);
      std::cout << "frames=" << r.clip.size() << " steps=" << args->steps << " seconds=" << num(r.seconds)
                << " out=" << args->out << '\n';
    };
  });
}

// serve

struct ServeArgs {
  std::string bind, library, pace = "realtime", transport = "ws";
  bool oracle = false;
  double oracle_std = 0.05;
  std::size_t chunk = 25;
  int threads = 2;
};

void add_serve(CLI::App& app, std::function<void()>& action) {
  auto args = std::make_shared<ServeArgs>();
  auto* cmd = app.add_subcommand("serve", "Run the motion streaming server");
  cmd->add_option("--bind", args->bind, "HOST:PORT (default: $ECHO_BIND or " + std::string(stream::kDefaultBind) + ")");
  auto* lib = cmd->add_option("--library", args->library, "Clip library directory")->check(CLI::ExistingDirectory);
  auto* oracle = cmd->add_flag("--oracle", args->oracle, "Generate with the Gaussian-oracle sampler");
  lib->excludes(oracle);
  cmd->add_option("--oracle-std", args->oracle_std)->check(CLI::PositiveNumber);
  cmd->add_option("--pace", args->pace, "realtime or burst")->check(CLI::IsMember({"realtime", "burst"}));
  cmd->add_option("--chunk", args->chunk, "Frames per chunk")->check(CLI::Range(1, 65535));
  cmd->add_option("--transport", args->transport, "ws or tcp")->check(CLI::IsMember({"ws", "tcp"}));
  cmd->add_option("--threads", args->threads, "I/O and worker threads")->check(CLI::PositiveNumber);
  cmd->callback([args, &action] {
    if (args->library.empty() && !args->oracle) throw CLI::RequiredError("--library or --oracle");
    action = [args] {
      std::shared_ptr<const stream::GeneratorBackend> backend;
      if (args->oracle) {
        stream::OracleBackend::Options opt;
        opt.std = args->oracle_std;
        backend = std::make_shared<stream::OracleBackend>(opt);
      } else {
        backend = std::make_shared<stream::LibraryBackend>(stream::LibraryBackend::from_directory(args->library));
      }
      const auto hp = stream::parse_host_port(args->bind.empty() ? stream::default_bind() : args->bind);
      stream::ServerConfig cfg;
      cfg.host = hp.host;
      cfg.port = hp.port;
      cfg.transport = stream::parse_transport(args->transport);
      cfg.chunk.pacing = stream::parse_pacing(args->pace);
      cfg.chunk.chunk_frames = args->chunk;
      cfg.io_threads = args->threads;
      cfg.worker_threads = args->threads;
      stream::Server server(cfg, backend);
      server.stop_on_signals();
      server.start();
      std::cout << "listening " << args->transport << "://" << hp.host << ':' << server.port()
                << " backend=" << backend->name() << std::endl;
      server.wait();
      server.stop();
    };
  });
}

// client

struct ClientArgs {
  std::string url, out, log, limits;
  std::vector<std::string> prompts;
  double timeout = 10.0, beta = 0.2, cfg = 2.5;
  int steps = 10;
  int frames = 0;
};

void add_client(CLI::App& app, std::function<void()>& action) {
  auto args = std::make_shared<ClientArgs>();
  auto* cmd = app.add_subcommand("client", "Request motions from a server over one connection");
  cmd->add_option("--url", args->url, "ws://HOST:PORT[/path] or tcp://HOST:PORT")->required();
  cmd->add_option("--prompt", args->prompts, "Prompt; repeat for successive requests")->required();
  cmd->add_option("--out,-o", args->out, "Write the last received clip here");
  cmd->add_option("--log", args->log, "Write the session log as JSON");
  cmd->add_option("--limits", args->limits, "Joint limits for online MSS")->check(CLI::ExistingFile);
  cmd->add_option("--timeout", args->timeout, "Seconds to wait for each message")->check(CLI::PositiveNumber);
  cmd->add_option("--beta", args->beta, "EMA action filter coefficient")->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--cfg", args->cfg, "Guidance scale sent to the server");
  cmd->add_option("--steps", args->steps, "Denoising steps sent to the server")->check(CLI::Range(1, 65535));
  cmd->add_option("--frames", args->frames, "Requested frames (0 = server default)")->check(CLI::Range(0, 65535));
  cmd->callback([args, &action] {
    action = [args] {
      stream::ClientOptions opt;
      opt.timeout_s = args->timeout;
      opt.filter_beta = args->beta;
      opt.cfg_scale = static_cast<float>(args->cfg);
      opt.num_steps = static_cast<std::uint16_t>(args->steps);
      opt.requested_frames = static_cast<std::uint16_t>(args->frames);
      if (!args->limits.empty()) opt.limits = load_joint_limits(args->limits);
      stream::Client client(args->url, opt);
      auto save_log = [&] {
        if (args->log.empty()) return;
        std::ofstream out(args->log);
        out << stream::to_json(client.log()).dump(2) << '\n';
        require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + args->log);
      };
      std::optional<MotionClip> last;
      try {
        for (const auto& prompt : args->prompts) {
          auto r = client.request(prompt);
          const auto& l = r.log;
          std::cout << "motion_id=" << l.motion_id << " frames=" << l.frames_received << " chunks=" << l.chunks
                    << " first_chunk_ms=" << num(l.first_chunk_latency_ms) << " total_ms=" << num(l.total_ms)
                    << " online_mss=" << (l.online_mss ? num(*l.online_mss) : std::string("n/a")) << '\n';
          last = std::move(r.clip);
        }
      } catch (...) {
        save_log();
        throw;
      }
      save_log();
      if (!args->out.empty() && last) write_clip(args->out, *last);
    };
  });
}

// recover

struct RecoverArgs {
  std::string dir, out, index, gravity, joints, joints_from;
  double threshold = 30.0;
};

void add_recover(CLI::App& app, std::function<void()>& action) {
  auto args = std::make_shared<RecoverArgs>();
  auto* rec = app.add_subcommand("recover", "Fall-recovery clip library");
  rec->require_subcommand(1);

  auto* build = rec->add_subcommand("build-index", "Index the first frame of every clip in a directory");
  build->add_option("dir", args->dir)->required()->check(CLI::ExistingDirectory);
  build->add_option("--out,-o", args->out, "Index file (default: DIR/index.txt)");
  build->callback([args, &action] {
    action = [args] {
      const auto lib = recovery::build_index(args->dir);
      const auto path = args->out.empty() ? (std::filesystem::path(args->dir) / "index.txt").string() : args->out;
      recovery::write_index(path, lib);
      std::cout << "entries=" << lib.entries.size() << " index=" << path << '\n';
    };
  });

  auto* query = rec->add_subcommand("query", "Pick the recovery clip for a fallen state");
  query->add_option("--index", args->index)->required()->check(CLI::ExistingFile);
  query->add_option("--gravity", args->gravity, "Body-frame gravity gx,gy,gz")->required();
  auto* jl = query->add_option("--joints", args->joints, "29 comma-separated joint angles");
  auto* jf = query->add_option("--joints-from", args->joints_from, "Use the first frame of this clip")
                 ->check(CLI::ExistingFile);
  jl->excludes(jf);
  query->add_option("--threshold", args->threshold, "Gravity cone half-angle in degrees")->check(CLI::Range(0.0, 180.0));
  query->callback([args, &action] {
    if (args->joints.empty() && args->joints_from.empty()) throw CLI::RequiredError("--joints or --joints-from");
    action = [args] {
      auto lib = recovery::read_index(args->index);
      lib.gravity_threshold_deg = args->threshold;
      const auto g = parse_list(args->gravity, 3, "--gravity");
      recovery::JointVector q{};
      if (!args->joints.empty()) {
        const auto v = parse_list(args->joints, kNumJoints, "--joints");
        std::copy(v.begin(), v.end(), q.begin());
      } else {
        const auto clip = read_clip_file(args->joints_from).clip;
        require(!clip.empty(), ErrorCode::EmptyInput, "clip is empty");
        std::copy(clip.frames[0].joint_pos().begin(), clip.frames[0].joint_pos().end(), q.begin());
      }
      const auto m = recovery::retrieve_recovery(Eigen::Vector3d(g[0], g[1], g[2]), q, lib);
      std::cout << "index=" << m.index << " clip=" << lib.entries[m.index].clip_path
                << " joint_distance=" << num(m.joint_distance) << " gravity_angle_deg=" << num(m.gravity_angle_deg)
                << " fallback=" << (m.fallback ? "true" : "false") << '\n';
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-to-motion streaming toolkit"};
  app.name("echo");
  app.require_subcommand(1);
  std::function<void()> action;
  add_convert(app, action);
  add_eval(app, action);
  add_sample(app, action);
  add_serve(app, action);
  add_client(app, action);
  add_recover(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const echo::Error& e) {
    std::cerr << "error: code=" << echo::to_string(e.code()) << " message=" << nlohmann::json(e.what()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: code=Internal message=" << nlohmann::json(e.what()).dump() << '\n';
    return 1;
  }
}
