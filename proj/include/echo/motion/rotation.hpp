#pragma once

#include <array>
#include <cmath>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "echo/error.hpp"

namespace echo {

using Rot6d = std::array<double, 6>;

inline constexpr double kDegeneracyTolerance = 1e-8;

/// First two columns of R, column-major: (r11, r21, r31, r12, r22, r32).
inline Rot6d rot_matrix_to_6d(const Eigen::Matrix3d& rotation) {
  require(rotation.allFinite(), ErrorCode::NonFinite,
          "rot_matrix_to_6d: non-finite rotation");
  return {rotation(0, 0), rotation(1, 0), rotation(2, 0),
          rotation(0, 1), rotation(1, 1), rotation(2, 1)};
}

/// Gram-Schmidt decoding. Any 6-vector whose two triples are non-degenerate
/// maps to a proper rotation (det = +1).
inline Eigen::Matrix3d rot6d_to_matrix(std::span<const double, 6> v) {
  const Eigen::Vector3d a(v[0], v[1], v[2]);
  const Eigen::Vector3d b(v[3], v[4], v[5]);
  require(a.allFinite() && b.allFinite(), ErrorCode::NonFinite,
          "rot6d_to_matrix: non-finite input");

  const double a_norm = a.norm();
  require(a_norm >= kDegeneracyTolerance, ErrorCode::DegenerateRotation,
          "rot6d_to_matrix: first column has near-zero norm");
  const Eigen::Vector3d b1 = a / a_norm;

  const Eigen::Vector3d residual = b - b1.dot(b) * b1;
  const double r_norm = residual.norm();
  require(r_norm >= kDegeneracyTolerance, ErrorCode::DegenerateRotation,
          "rot6d_to_matrix: second column is parallel to the first");
  const Eigen::Vector3d b2 = residual / r_norm;
  const Eigen::Vector3d b3 = b1.cross(b2);

  Eigen::Matrix3d out;
  out.col(0) = b1;
  out.col(1) = b2;
  out.col(2) = b3;
  return out;
}

inline Eigen::Matrix3d rot6d_to_matrix(const Rot6d& v) {
  return rot6d_to_matrix(std::span<const double, 6>(v));
}

inline bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-6) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

inline Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace echo
