#pragma once

// Square-matrix primitives: the pseudo-singular value decomposition, the
// signed distance to the determinant-zero hypersurface and the margin to the
// locus where that distance stops being smooth.

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "coplanar/errors.hpp"

namespace coplanar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative threshold under which |S| counts as lying on the degeneration locus.
inline constexpr double kOnSigmaRelTol = 1e-13;

/// q = rot_left * diag(x) * rot_right^T with both rotations in SO(d) and
/// x(0) >= ... >= x(d-2) >= |x(d-1)|.  Only x is unique.
struct PseudoSvd {
  Matrix rot_left;
  Vector x;
  Matrix rot_right;

  Matrix reconstruct() const { return rot_left * x.asDiagonal() * rot_right.transpose(); }
};

namespace detail {

inline void require_finite_square(const Matrix& q, const char* what) {
  if (q.rows() != q.cols() || q.rows() == 0)
    throw InputError(std::string(what) + ": expected a non-empty square matrix, got " +
                     std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
  if (!q.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

}  // namespace detail

/// Pseudo-SVD obtained from a standard SVD by moving any reflection of either
/// factor into the sign of the last principal value.
inline PseudoSvd pseudo_svd(const Matrix& q) {
  detail::require_finite_square(q, "pseudo_svd");
  const Eigen::Index d = q.rows();
  Eigen::JacobiSVD<Matrix> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);

  PseudoSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  if (out.rot_left.determinant() < 0.0) {
    out.rot_left.col(d - 1) *= -1.0;
    out.x(d - 1) = -out.x(d - 1);
  }
  if (out.rot_right.determinant() < 0.0) {
    out.rot_right.col(d - 1) *= -1.0;
    out.x(d - 1) = -out.x(d - 1);
  }
  return out;
}

/// Frobenius distance from q to {det = 0}, carrying the sign of det q.
inline double signed_distance(const Matrix& q) { return pseudo_svd(q).x(q.rows() - 1); }

/// x_{d-1} - |x_d|; zero exactly on the set where the signed distance is not
/// smooth.  For d = 1 there is no such set and the margin is +infinity.
inline double singular_margin(const Matrix& q) {
  const Vector x = pseudo_svd(q).x;
  const Eigen::Index d = x.size();
  if (d < 2) return std::numeric_limits<double>::infinity();
  return x(d - 2) - std::abs(x(d - 1));
}

/// Both quantities from a single decomposition.
struct DistanceAndMargin {
  double signed_distance;
  double margin;
};

inline DistanceAndMargin distance_and_margin(const Matrix& q) {
  const Vector x = pseudo_svd(q).x;
  const Eigen::Index d = x.size();
  const double s = x(d - 1);
  const double margin = d < 2 ? std::numeric_limits<double>::infinity() : x(d - 2) - std::abs(s);
  return {s, margin};
}

inline bool on_degeneration_locus(const Matrix& q) {
  return std::abs(signed_distance(q)) < kOnSigmaRelTol * q.norm();
}

}  // namespace coplanar
