#pragma once

// Mass system, normalized Jacobi bases of the zero-sum hyperplane L, and the
// translation reduction between d x (d+1) configurations and d x d matrices.
//
// Configurations and velocities are d x N matrices whose columns are the
// bodies.  The mass inner product on configurations is <q, q> = sum m_a |q_a|^2;
// on the label space it is <e_a, e_b> = delta_ab / m_a.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "coplanar/errors.hpp"
#include "coplanar/linalg.hpp"

namespace coplanar {

using FullConfiguration = Matrix;  // d x N positions
using FullVelocity = Matrix;       // d x N velocities

namespace detail {

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Mass inner product of two label-space vectors.
inline double label_dot(const Vector& a, const Vector& b, const Vector& masses) {
  return (a.array() * b.array() / masses.array()).sum();
}

// Jacobi vector separating cluster A (negative side) from cluster B, each
// body weighted by its share of its cluster mass.
inline Vector cluster_vector(const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b,
                             const Vector& masses) {
  Vector j = Vector::Zero(masses.size());
  double ma = 0.0, mb = 0.0;
  for (auto i : a) ma += masses(i);
  for (auto i : b) mb += masses(i);
  for (auto i : a) j(i) = -masses(i) / ma;
  for (auto i : b) j(i) = masses(i) / mb;
  return j;
}

}  // namespace detail

/// Normalized Jacobi basis (columns, N x (N-1)) for the given masses.
///
/// N = 4 uses the pairwise scheme J1 = (1,-1,0,0), J2 = (0,0,1,-1),
/// J3 = (-p1,-p2,p3,p4); other powers of two use nested pairing of clusters;
/// everything else uses sequential Jacobi vectors (body k+1 against the
/// centre of mass of bodies 1..k).  The basis is mass-orthonormal, lies in L,
/// and is oriented: det[E_1 ... E_{N-1}, m] > 0, fixed by negating E_{N-1}.
inline Matrix jacobi_basis(const Vector& masses) {
  const Eigen::Index n = masses.size();
  if (n < 2) throw InputError("jacobi_basis: need at least two bodies");
  for (Eigen::Index a = 0; a < n; ++a)
    if (!(masses(a) > 0.0) || !std::isfinite(masses(a)))
      throw InputError("jacobi_basis: masses must be positive and finite");

  std::vector<Vector> raw;
  if (n == 4) {
    const double m12 = masses(0) + masses(1), m34 = masses(2) + masses(3);
    Vector j1(4), j2(4), j3(4);
    j1 << 1.0, -1.0, 0.0, 0.0;
    j2 << 0.0, 0.0, 1.0, -1.0;
    j3 << -masses(0) / m12, -masses(1) / m12, masses(2) / m34, masses(3) / m34;
    raw = {j1, j2, j3};
  } else if (detail::is_power_of_two(n)) {
    std::vector<std::vector<Eigen::Index>> clusters;
    for (Eigen::Index a = 0; a < n; ++a) clusters.push_back({a});
    while (clusters.size() > 1) {
      std::vector<std::vector<Eigen::Index>> merged;
      for (std::size_t c = 0; c + 1 < clusters.size(); c += 2) {
        raw.push_back(detail::cluster_vector(clusters[c], clusters[c + 1], masses));
        auto joined = clusters[c];
        joined.insert(joined.end(), clusters[c + 1].begin(), clusters[c + 1].end());
        merged.push_back(std::move(joined));
      }
      clusters = std::move(merged);
    }
  } else {
    Vector j1 = Vector::Zero(n);
    j1(0) = 1.0;
    j1(1) = -1.0;
    raw.push_back(j1);
    std::vector<Eigen::Index> head{0, 1};
    for (Eigen::Index k = 2; k < n; ++k) {
      raw.push_back(detail::cluster_vector(head, {k}, masses));
      head.push_back(k);
    }
  }

  Matrix basis(n, n - 1);
  for (Eigen::Index j = 0; j < n - 1; ++j)
    basis.col(j) = raw[j] / std::sqrt(detail::label_dot(raw[j], raw[j], masses));

  Matrix frame(n, n);
  frame.leftCols(n - 1) = basis;
  frame.col(n - 1) = masses;
  if (frame.determinant() < 0.0) basis.col(n - 2) *= -1.0;
  return basis;
}

/// Masses, gravitational constant and the cached oriented Jacobi basis.
/// Immutable after construction.
class MassSystem {
 public:
  explicit MassSystem(Vector masses, double G = 1.0)
      : masses_(std::move(masses)), G_(G), basis_(jacobi_basis(masses_)) {
    if (!(G_ > 0.0) || !std::isfinite(G_)) throw InputError("MassSystem: G must be positive");
    total_ = masses_.sum();
    lift_.resize(basis_.cols(), basis_.rows());
    for (Eigen::Index j = 0; j < basis_.cols(); ++j)
      for (Eigen::Index a = 0; a < basis_.rows(); ++a) lift_(j, a) = basis_(a, j) / masses_(a);
  }

  MassSystem(std::initializer_list<double> masses, double G = 1.0)
      : MassSystem(Eigen::Map<const Vector>(masses.begin(), static_cast<Eigen::Index>(masses.size())),
                   G) {}

  const Vector& masses() const { return masses_; }
  double mass(Eigen::Index a) const { return masses_(a); }
  double total_mass() const { return total_; }
  double G() const { return G_; }
  Eigen::Index bodies() const { return masses_.size(); }
  /// Spatial dimension d = N - 1.
  Eigen::Index dimension() const { return masses_.size() - 1; }
  /// N x (N-1), columns are the normalized Jacobi vectors.
  const Matrix& jacobi() const { return basis_; }
  /// (N-1) x N right inverse of the basis, used by embed().
  const Matrix& lift() const { return lift_; }

 private:
  Vector masses_;
  double G_;
  double total_ = 0.0;
  Matrix basis_;
  Matrix lift_;
};

namespace detail {

inline void require_shape(const Matrix& q, const MassSystem& m, const char* what) {
  if (q.cols() != m.bodies() || q.rows() != m.dimension())
    throw InputError(std::string(what) + ": expected a " + std::to_string(m.dimension()) + "x" +
                     std::to_string(m.bodies()) + " matrix, got " + std::to_string(q.rows()) + "x" +
                     std::to_string(q.cols()));
  if (!q.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

}  // namespace detail

inline Vector center_of_mass(const FullConfiguration& q, const MassSystem& m) {
  return q * m.masses() / m.total_mass();
}

inline Vector linear_momentum(const FullVelocity& v, const MassSystem& m) { return v * m.masses(); }

/// sqrt(sum m_a |q_a|^2)
inline double mass_norm(const Matrix& q, const MassSystem& m) {
  return std::sqrt((q.colwise().squaredNorm().transpose().array() * m.masses().array()).sum());
}

/// Translation reduction: column j is q(E_j).
inline Matrix reduce(const FullConfiguration& q, const MassSystem& m) {
  detail::require_shape(q, m, "reduce");
  return q * m.jacobi();
}

/// Centre-of-mass-zero configuration whose reduction is r.
inline FullConfiguration embed(const Matrix& r, const MassSystem& m) {
  if (r.rows() != m.dimension() || r.cols() != m.dimension())
    throw InputError("embed: reduced matrix must be d x d");
  return r * m.lift();
}

/// Skew-symmetric J_ij = sum_a m_a (q_ai v_aj - q_aj v_ai).
inline Matrix angular_momentum(const FullConfiguration& q, const FullVelocity& v, const MassSystem& m) {
  detail::require_shape(q, m, "angular_momentum");
  detail::require_shape(v, m, "angular_momentum");
  const Matrix weighted = q * m.masses().asDiagonal();
  const Matrix qv = weighted * v.transpose();
  return qv - qv.transpose();
}

/// Angular momentum of a 3-dimensional system as the usual axial vector.
inline Eigen::Vector3d angular_momentum_vector(const Matrix& j) {
  if (j.rows() != 3) throw InputError("angular_momentum_vector: only defined for d = 3");
  return {j(1, 2), j(2, 0), j(0, 1)};
}

/// Norm of the bivector: sqrt(sum_{i<j} J_ij^2).
inline double bivector_norm(const Matrix& j) { return j.norm() / std::sqrt(2.0); }

inline double kinetic_energy(const FullVelocity& v, const MassSystem& m) {
  const double n = mass_norm(v, m);
  return 0.5 * n * n;
}

struct ZeroAmProjection {
  FullVelocity velocity;
  Matrix rotation_generator;  // the skew matrix removed from v
  bool rank_deficient = false;
};

/// Removes the rigid-rotation part xi*q of v that is closest in the mass
/// metric.  The minimum-norm xi is used, and flagged, when q has rank < d-1.
inline ZeroAmProjection zero_am_projection(const FullConfiguration& q, const FullVelocity& v,
                                           const MassSystem& m) {
  detail::require_shape(q, m, "zero_am_projection");
  detail::require_shape(v, m, "zero_am_projection");
  const Eigen::Index d = q.rows();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> planes;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) planes.emplace_back(i, j);
  const auto k = static_cast<Eigen::Index>(planes.size());

  ZeroAmProjection out{v, Matrix::Zero(d, d), false};
  if (k == 0) return out;

  std::vector<Matrix> fields;
  fields.reserve(planes.size());
  for (auto [i, j] : planes) {
    Matrix gen = Matrix::Zero(d, d);
    gen(i, j) = 1.0;
    gen(j, i) = -1.0;
    fields.push_back(gen * q);
  }
  auto dot = [&](const Matrix& a, const Matrix& b) {
    return ((a.array() * b.array()).colwise().sum().transpose() * m.masses().array()).sum();
  };
  Matrix gram(k, k);
  Vector rhs(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    rhs(r) = dot(fields[r], v);
    for (Eigen::Index c = 0; c < k; ++c) gram(r, c) = dot(fields[r], fields[c]);
  }

  Eigen::JacobiSVD<Matrix> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double cutoff = 1e-12 * std::max(s(0), std::numeric_limits<double>::min());
  Vector coef = Vector::Zero(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    if (s(r) > cutoff)
      coef += svd.matrixV().col(r) * (svd.matrixU().col(r).dot(rhs) / s(r));
    else
      out.rank_deficient = true;
  }

  for (Eigen::Index r = 0; r < k; ++r) {
    auto [i, j] = planes[r];
    out.rotation_generator(i, j) += coef(r);
    out.rotation_generator(j, i) -= coef(r);
    out.velocity -= coef(r) * fields[r];
  }
  return out;
}

/// N x N matrix of mutual distances.
inline Matrix pair_distances(const FullConfiguration& q) {
  const Eigen::Index n = q.cols();
  Matrix r = Matrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b) r(a, b) = r(b, a) = (q.col(a) - q.col(b)).norm();
  return r;
}

struct PairExtent {
  double max_distance;
  double min_distance;
};

inline PairExtent pair_extent(const FullConfiguration& q) {
  PairExtent e{0.0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index a = 0; a < q.cols(); ++a)
    for (Eigen::Index b = a + 1; b < q.cols(); ++b) {
      const double r = (q.col(a) - q.col(b)).norm();
      e.max_distance = std::max(e.max_distance, r);
      e.min_distance = std::min(e.min_distance, r);
    }
  return e;
}

}  // namespace coplanar
