#pragma once

// Distribution and retrieval metrics over precomputed motion/text embeddings:
// FID, R-Precision, Diversity and MM-Dist.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "echo/bytes.hpp"
#include "echo/error.hpp"
#include "echo/text.hpp"

namespace echo {

enum class EmbeddingRole : std::uint8_t { Motion = 0, Text = 1 };

struct EmbeddingSet {
  Eigen::MatrixXd rows;  // N x D
  EmbeddingRole role = EmbeddingRole::Motion;
  std::vector<std::string> ids;  // optional pairing ids, empty or size N

  Eigen::Index count() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }
};

inline void validate_embeddings(const EmbeddingSet& e, Eigen::Index min_rows = 1) {
  require(e.count() >= min_rows, ErrorCode::InvalidArgument,
          "embedding set needs at least " + std::to_string(min_rows) + " rows");
  require(e.dim() >= 1, ErrorCode::InvalidArgument, "embedding dimension must be positive");
  require(e.rows.allFinite(), ErrorCode::NonFinite, "non-finite embeddings");
  require(e.ids.empty() || e.ids.size() == static_cast<std::size_t>(e.count()),
          ErrorCode::ShapeMismatch, "pairing ids must match row count");
}

inline void require_paired(const EmbeddingSet& a, const EmbeddingSet& b) {
  require(a.count() == b.count() && a.dim() == b.dim(), ErrorCode::ShapeMismatch,
          "paired embedding sets must have equal N and D");
  if (!a.ids.empty() && !b.ids.empty()) {
    require(a.ids == b.ids, ErrorCode::ShapeMismatch, "pairing ids differ");
  }
}

// ---------------------------------------------------------------------------
// FID

inline constexpr double kEigenClip = 1e-10;

/// Symmetric PSD square root via eigendecomposition; eigenvalues below the
/// clip threshold (including small negative ones) are treated as zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  require(es.info() == Eigen::Success, ErrorCode::NonFinite, "eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (auto& v : ev) v = v < kEigenClip ? 0.0 : std::sqrt(v);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Frechet distance between N(mu_a, cov_a) and N(mu_b, cov_b).
/// Tr((A B)^1/2) is evaluated as Tr((A^1/2 B A^1/2)^1/2), which is symmetric.
inline double frechet_distance(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a,
                               const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& cov_b) {
  require(mu_a.size() == mu_b.size() && cov_a.rows() == mu_a.size() && cov_a.cols() == mu_a.size() &&
              cov_b.rows() == mu_b.size() && cov_b.cols() == mu_b.size(),
          ErrorCode::ShapeMismatch, "frechet_distance: inconsistent shapes");
  const Eigen::MatrixXd root_a = psd_sqrt(cov_a);
  const Eigen::MatrixXd inner = root_a * cov_b * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()),
                                                    Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::NonFinite, "eigendecomposition failed");
  double tr_cross = 0;
  for (double v : es.eigenvalues()) tr_cross += v < kEigenClip ? 0.0 : std::sqrt(v);
  const double d = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * tr_cross;
  return std::max(d, 0.0);
}

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased (N - 1)
};

inline GaussianFit fit_gaussian(const Eigen::MatrixXd& rows) {
  require(rows.rows() >= 2, ErrorCode::InvalidArgument, "need at least 2 rows to fit a covariance");
  GaussianFit g;
  g.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - g.mean.transpose();
  g.cov = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
  return g;
}

inline double fid(const EmbeddingSet& a, const EmbeddingSet& b) {
  validate_embeddings(a, 2);
  validate_embeddings(b, 2);
  require(a.dim() == b.dim(), ErrorCode::ShapeMismatch, "fid: embedding dimensions differ");
  if (a.count() < a.dim() || b.count() < b.dim()) {
    std::clog << "warning: fid with fewer samples than dimensions; covariance is rank deficient\n";
  }
  const auto ga = fit_gaussian(a.rows);
  const auto gb = fit_gaussian(b.rows);
  return frechet_distance(ga.mean, ga.cov, gb.mean, gb.cov);
}

// ---------------------------------------------------------------------------
// R-Precision

struct RPrecision {
  std::array<double, 3> top{};  // top-1, top-2, top-3 hit rates
};

/// For every motion, its paired text plus pool_size - 1 distinct other texts
/// (sampled without replacement) are ranked by Euclidean distance. The true
/// text wins ties.
inline RPrecision r_precision(const EmbeddingSet& motion, const EmbeddingSet& text_emb,
                              int pool_size = 32, std::uint64_t seed = 0) {
  validate_embeddings(motion);
  validate_embeddings(text_emb);
  require_paired(motion, text_emb);
  require(pool_size >= 1, ErrorCode::InvalidArgument, "pool_size must be positive");
  const auto n = static_cast<std::size_t>(motion.count());
  require(n >= static_cast<std::size_t>(pool_size), ErrorCode::InvalidArgument,
          "r_precision needs N >= pool_size");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> others(n > 0 ? n - 1 : 0);
  std::array<std::size_t, 3> hits{};
  for (std::size_t i = 0; i < n; ++i) {
    // Candidates are every index except i; a partial Fisher-Yates shuffle
    // draws pool_size - 1 of them.
    for (std::size_t k = 0, idx = 0; idx < n; ++idx) {
      if (idx != i) others[k++] = idx;
    }
    const auto draw = static_cast<std::size_t>(pool_size - 1);
    for (std::size_t k = 0; k < draw; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, others.size() - 1);
      std::swap(others[k], others[pick(rng)]);
    }
    const double d_true = (motion.rows.row(static_cast<Eigen::Index>(i)) -
                           text_emb.rows.row(static_cast<Eigen::Index>(i)))
                              .norm();
    std::size_t closer = 0;
    for (std::size_t k = 0; k < draw; ++k) {
      const double d = (motion.rows.row(static_cast<Eigen::Index>(i)) -
                        text_emb.rows.row(static_cast<Eigen::Index>(others[k])))
                           .norm();
      if (d < d_true) ++closer;
    }
    for (std::size_t k = 0; k < 3; ++k) {
      if (closer <= k) ++hits[k];
    }
  }
  RPrecision out;
  for (std::size_t k = 0; k < 3; ++k) out.top[k] = static_cast<double>(hits[k]) / static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------------------------
// Diversity and MM-Dist

/// Mean Euclidean distance over num_pairs seeded random pairs (i != j).
inline double diversity(const EmbeddingSet& emb, int num_pairs = 300, std::uint64_t seed = 0) {
  validate_embeddings(emb);
  require(emb.count() >= 2, ErrorCode::InvalidArgument, "diversity needs at least 2 embeddings");
  require(num_pairs >= 1, ErrorCode::InvalidArgument, "num_pairs must be positive");
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::size_t>(emb.count());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::uniform_int_distribution<std::size_t> second(0, n - 2);
  double sum = 0;
  for (int p = 0; p < num_pairs; ++p) {
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    sum += (emb.rows.row(static_cast<Eigen::Index>(i)) - emb.rows.row(static_cast<Eigen::Index>(j))).norm();
  }
  return sum / num_pairs;
}

inline double mm_dist(const EmbeddingSet& motion, const EmbeddingSet& text_emb) {
  validate_embeddings(motion);
  validate_embeddings(text_emb);
  require_paired(motion, text_emb);
  return (motion.rows - text_emb.rows).rowwise().norm().mean();
}

// ---------------------------------------------------------------------------
// .emb files: "EMB1" | N u32 | D u32 | role u8 | N x D f32, little-endian.
// CSV: one embedding per line, comma or whitespace separated; '#' comments.

inline Bytes encode_emb(const EmbeddingSet& e) {
  Bytes out;
  ByteWriter w(out);
  w.raw(std::string_view("EMB1"));
  w.u32(static_cast<std::uint32_t>(e.count()));
  w.u32(static_cast<std::uint32_t>(e.dim()));
  w.u8(static_cast<std::uint8_t>(e.role));
  for (Eigen::Index i = 0; i < e.count(); ++i) {
    for (Eigen::Index d = 0; d < e.dim(); ++d) w.f32(static_cast<float>(e.rows(i, d)));
  }
  return out;
}

inline EmbeddingSet decode_emb(std::span<const std::uint8_t> data) {
  ByteReader r(data, ErrorCode::Format);
  const auto magic = r.str(4);
  require(magic == "EMB1", ErrorCode::BadMagic, "not an .emb file (bad magic)");
  const auto n = r.u32();
  const auto d = r.u32();
  const auto role = r.u8();
  require(role <= 1, ErrorCode::Format, "unknown embedding role");
  require(r.remaining() == static_cast<std::size_t>(n) * d * 4, ErrorCode::Format,
          ".emb payload size does not match N x D");
  EmbeddingSet e;
  e.role = static_cast<EmbeddingRole>(role);
  e.rows.resize(n, d);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t k = 0; k < d; ++k) e.rows(i, k) = r.f32();
  }
  return e;
}

inline EmbeddingSet parse_embedding_csv(std::span<const std::string> lines,
                                        EmbeddingRole role = EmbeddingRole::Motion) {
  std::vector<std::vector<double>> rows;
  for (const auto& line : lines) {
    if (text::is_comment(line)) continue;
    std::vector<double> row;
    for (auto tok : text::tokens(text::strip_comment(line))) row.push_back(text::parse_number<double>(tok));
    require(rows.empty() || row.size() == rows.front().size(), ErrorCode::Format,
            "ragged embedding CSV");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::Format, "embedding CSV has no rows");
  EmbeddingSet e;
  e.role = role;
  e.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      e.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return e;
}

inline EmbeddingSet read_embeddings(const std::string& path, EmbeddingRole csv_role = EmbeddingRole::Motion) {
  if (text::ends_with(path, ".csv") || text::ends_with(path, ".txt")) {
    const auto lines = text::read_lines(path);
    return parse_embedding_csv(lines, csv_role);
  }
  return decode_emb(read_file_bytes(path));
}

inline void write_embeddings(const std::string& path, const EmbeddingSet& e) {
  write_file_bytes(path, encode_emb(e));
}

}  // namespace echo
