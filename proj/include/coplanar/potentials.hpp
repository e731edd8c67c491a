#pragma once

// Attractive pair potentials V(q) = G sum_{a<b} m_a m_b f_ab(r_ab), their
// mass-metric gradient, and the frequency bound that follows from a bound
// r_ab <= c on the mutual distances.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "coplanar/errors.hpp"
#include "coplanar/reduction.hpp"

namespace coplanar {

enum class PotentialKind { newtonian, power_law, custom };

inline std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::newtonian: return "newtonian";
    case PotentialKind::power_law: return "power_law";
    case PotentialKind::custom: return "custom";
  }
  return "unknown";
}

/// f, f' and f'' of one pair at one distance.
struct PairTerms {
  double f;
  double df;
  double d2f;
};

using RadialFunction = std::function<double(double)>;

/// A family of pair potentials f_ab(r) = k_ab * base(r).
///
/// newtonian: base(r) = -1/r with k_ab = 1.
/// power_law: base(r) = -1/r^alpha.
/// custom:    base, base', base'' supplied by the caller.
class PairPotential {
 public:
  static PairPotential newtonian() { return PairPotential(PotentialKind::newtonian, 1.0); }

  static PairPotential power_law(double alpha, double k = 1.0) {
    if (!(alpha > 0.0) || !(k > 0.0)) throw PotentialSpecError("power_law: need alpha > 0 and k > 0");
    PairPotential p(PotentialKind::power_law, alpha);
    p.uniform_k_ = k;
    return p;
  }

  /// Per-pair coefficients; only the strict upper triangle is read.
  static PairPotential power_law(double alpha, Matrix k) {
    PairPotential p = power_law(alpha, 1.0);
    p.set_coefficients(std::move(k));
    return p;
  }

  static PairPotential custom(RadialFunction f, RadialFunction df, RadialFunction d2f) {
    if (!f || !df || !d2f) throw PotentialSpecError("custom potential: all three evaluators are required");
    PairPotential p(PotentialKind::custom, 0.0);
    p.f_ = std::move(f);
    p.df_ = std::move(df);
    p.d2f_ = std::move(d2f);
    return p;
  }

  PotentialKind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  bool has_pair_coefficients() const { return k_.size() > 0; }
  const Matrix& pair_coefficients() const { return k_; }
  double uniform_coefficient() const { return uniform_k_; }

  void set_coefficients(Matrix k) {
    for (Eigen::Index a = 0; a < k.rows(); ++a)
      for (Eigen::Index b = a + 1; b < k.cols(); ++b)
        if (!(k(a, b) > 0.0)) throw PotentialSpecError("pair coefficients must be positive");
    k_ = std::move(k);
  }

  double coefficient(Eigen::Index a, Eigen::Index b) const {
    if (k_.size() == 0) return uniform_k_;
    return a < b ? k_(a, b) : k_(b, a);
  }

  /// Base radial profile (coefficient 1).
  PairTerms base(double r) const {
    switch (kind_) {
      case PotentialKind::newtonian: {
        const double inv = 1.0 / r;
        return {-inv, inv * inv, -2.0 * inv * inv * inv};
      }
      case PotentialKind::power_law: {
        const double a = exponent_;
        const double p = std::pow(r, -a);
        return {-p, a * p / r, -a * (a + 1.0) * p / (r * r)};
      }
      case PotentialKind::custom: return {f_(r), df_(r), d2f_(r)};
    }
    return {0.0, 0.0, 0.0};
  }

  PairTerms pair(Eigen::Index a, Eigen::Index b, double r) const {
    const double k = coefficient(a, b);
    const PairTerms t = base(r);
    return {k * t.f, k * t.df, k * t.d2f};
  }

  /// f'_ab(r) / r.  Exact arithmetic for the Newtonian case.
  double df_over_r(Eigen::Index a, Eigen::Index b, double r) const {
    if (kind_ == PotentialKind::newtonian) return 1.0 / (r * r * r);
    return pair(a, b, r).df / r;
  }

 private:
  PairPotential(PotentialKind kind, double exponent) : kind_(kind), exponent_(exponent) {}

  PotentialKind kind_;
  double exponent_;
  double uniform_k_ = 1.0;
  Matrix k_;
  RadialFunction f_, df_, d2f_;
};

/// Samples f' > 0, f'' < 0 and strict decrease of f'/r on a logarithmic grid
/// over [lo_factor*c, hi_factor*c] for every pair; throws PotentialSpecError.
inline void check_attractive(const PairPotential& p, double c, Eigen::Index bodies, int samples = 10000,
                             double lo_factor = 1e-6, double hi_factor = 10.0) {
  if (!(c > 0.0)) throw InputError("check_attractive: c must be positive");
  if (samples < 2) throw InputError("check_attractive: need at least two samples");
  const double lo = std::log(lo_factor * c), hi = std::log(hi_factor * c);
  const Eigen::Index pairs_end = p.has_pair_coefficients() ? bodies : std::min<Eigen::Index>(bodies, 2);
  for (Eigen::Index a = 0; a < pairs_end; ++a)
    for (Eigen::Index b = a + 1; b < pairs_end; ++b) {
      double prev = std::numeric_limits<double>::infinity();
      for (int i = 0; i < samples; ++i) {
        const double r = std::exp(lo + (hi - lo) * i / (samples - 1));
        const PairTerms t = p.pair(a, b, r);
        if (!(t.df > 0.0) || !(t.d2f < 0.0))
          throw PotentialSpecError("pair potential is not attractive and concave at r = " + std::to_string(r));
        const double ratio = t.df / r;
        if (!(ratio < prev))
          throw PotentialSpecError("f'(r)/r is not strictly decreasing at r = " + std::to_string(r));
        prev = ratio;
      }
    }
}

/// G sum_{a<b} m_a m_b f_ab(r_ab).
inline double potential_value(const FullConfiguration& q, const MassSystem& m, const PairPotential& p) {
  detail::require_shape(q, m, "potential_value");
  double v = 0.0;
  for (Eigen::Index a = 0; a < q.cols(); ++a)
    for (Eigen::Index b = a + 1; b < q.cols(); ++b) {
      const double r = (q.col(a) - q.col(b)).norm();
      if (!(r > 0.0)) throw CollisionError("potential_value: bodies " + std::to_string(a + 1) + " and " +
                                           std::to_string(b + 1) + " coincide");
      v += m.mass(a) * m.mass(b) * p.pair(a, b, r).f;
    }
  return m.G() * v;
}

/// Writes q'' = -grad V (mass metric) into acc:
/// acc_a = G sum_{b != a} m_b f'_ab(r_ab) (q_b - q_a) / r_ab.
inline void acceleration_into(const Eigen::Ref<const Matrix>& q, const MassSystem& m, const PairPotential& p,
                              Eigen::Ref<Matrix> acc) {
  acc.setZero();
  const Eigen::Index n = q.cols(), d = q.rows();
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b) {
      double r2 = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double dx = q(i, b) - q(i, a);
        r2 += dx * dx;
      }
      const double r = std::sqrt(r2);
      if (!(r > 0.0)) throw CollisionError("acceleration: bodies " + std::to_string(a + 1) + " and " +
                                           std::to_string(b + 1) + " coincide");
      const double s = m.G() * p.df_over_r(a, b, r);
      const double sa = s * m.mass(b), sb = s * m.mass(a);
      for (Eigen::Index i = 0; i < d; ++i) {
        const double dx = q(i, b) - q(i, a);
        acc(i, a) += sa * dx;
        acc(i, b) -= sb * dx;
      }
    }
}

inline Matrix acceleration(const FullConfiguration& q, const MassSystem& m, const PairPotential& p) {
  detail::require_shape(q, m, "acceleration");
  Matrix acc(q.rows(), q.cols());
  acceleration_into(q, m, p, acc);
  return acc;
}

/// delta = min over pairs of f'_ab(c)/c, so that f'_ab(r)/r >= delta whenever r <= c.
inline double delta_bound(const PairPotential& p, double c, Eigen::Index bodies) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("delta_bound: c must be positive and finite");
  if (p.kind() == PotentialKind::newtonian) return 1.0 / (c * c * c);
  if (p.kind() == PotentialKind::custom) check_attractive(p, c, bodies);
  double delta = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < bodies; ++a)
    for (Eigen::Index b = a + 1; b < bodies; ++b) delta = std::min(delta, p.df_over_r(a, b, c));
  if (!(delta > 0.0)) throw PotentialSpecError("delta_bound: non-positive bound");
  return delta;
}

inline double delta_bound(const PairPotential& p, double c, const MassSystem& m) {
  return delta_bound(p, c, m.bodies());
}

/// omega = sqrt(G M delta(c)); zeros of S are at most pi/omega apart.
inline double oscillator_frequency(const MassSystem& m, const PairPotential& p, double c) {
  return std::sqrt(m.G() * m.total_mass() * delta_bound(p, c, m));
}

inline double degeneration_window(const MassSystem& m, const PairPotential& p, double c) {
  return M_PI / oscillator_frequency(m, p, c);
}

}  // namespace coplanar
