#pragma once

// Named initial-value problems used by the CLI and the acceptance runs.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "coplanar/dynamics.hpp"
#include "coplanar/errors.hpp"
#include "coplanar/potentials.hpp"
#include "coplanar/reduction.hpp"

namespace coplanar {

struct Scenario {
  std::string name;
  std::string description;
  MassSystem masses;
  PairPotential potential;
  State initial;
  /// Period for periodic orbits, otherwise the natural run length.
  std::optional<double> period;
  double default_t_end;
  std::uint64_t seed = 0;
  bool zero_angular_momentum = false;
};

struct ScenarioInfo {
  std::string name;
  std::string description;
};

inline std::vector<ScenarioInfo> scenario_catalog() {
  return {
      {"figure_eight", "d=2, equal masses, zero angular momentum figure-eight choreography (period-refined)"},
      {"lagrange_rotating",
       "d=2, masses (1, 0.01, 0.01), rigidly rotating equilateral triangle (nonzero angular momentum, linearly stable)"},
      {"lagrange_rotating_equal",
       "d=2, equal masses, rigidly rotating equilateral triangle (nonzero angular momentum, linearly unstable)"},
      {"perturbed_tetrahedron",
       "d=3, equal masses, regular tetrahedron with seeded zero-angular-momentum velocities, negative energy"},
      {"gerver_escape", "d=3, rotating Lagrange triple with a fourth body receding along the normal axis"},
  };
}

namespace detail {

/// Uniform double in [lo, hi) from the top 53 bits of a 64-bit Mersenne twister.
inline double uniform_from(std::mt19937_64& eng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
}

inline Matrix column_matrix(std::initializer_list<std::initializer_list<double>> cols) {
  const auto n = static_cast<Eigen::Index>(cols.size());
  const auto d = static_cast<Eigen::Index>(cols.begin()->size());
  Matrix m(d, n);
  Eigen::Index j = 0;
  for (const auto& c : cols) {
    Eigen::Index i = 0;
    for (double x : c) m(i++, j) = x;
    ++j;
  }
  return m;
}

// Published figure-eight data: x1 = -x2, x3 = 0, v1 = v2 = -v3/2.
struct EightParams {
  double x, y, vx, vy, period;
};

inline State eight_state(const EightParams& p) {
  State s;
  s.t = 0.0;
  s.q = column_matrix({{p.x, p.y}, {-p.x, -p.y}, {0.0, 0.0}});
  s.v = column_matrix({{-0.5 * p.vx, -0.5 * p.vy}, {-0.5 * p.vx, -0.5 * p.vy}, {p.vx, p.vy}});
  return s;
}

inline Vector eight_return_residual(const EightParams& p, const MassSystem& m, const PairPotential& pot) {
  const State s0 = eight_state(p);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-15;
  cfg.t_end = p.period;
  cfg.sample_interval = p.period;
  const Trajectory traj = integrate(s0, m, pot, cfg);
  const State& s1 = traj.samples().back();
  return pack(s1) - pack(s0);
}

/// Gauss-Newton on (x, y, vx, vy, T) for the return-map residual.
inline EightParams refine_figure_eight(EightParams p, const MassSystem& m, const PairPotential& pot, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    const Vector r0 = eight_return_residual(p, m, pot);
    Matrix jac(r0.size(), 5);
    double* fields[5] = {&p.x, &p.y, &p.vx, &p.vy, &p.period};
    for (int k = 0; k < 5; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(*fields[k]));
      const double keep = *fields[k];
      *fields[k] = keep + h;
      const Vector rp = eight_return_residual(p, m, pot);
      *fields[k] = keep - h;
      const Vector rm = eight_return_residual(p, m, pot);
      *fields[k] = keep;
      jac.col(k) = (rp - rm) / (2 * h);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(jac);
    cod.setThreshold(1e-9);
    const Vector step = cod.solve(-r0);
    for (int k = 0; k < 5; ++k) *fields[k] += step(k);
  }
  return p;
}

inline State advance(const State& s, const MassSystem& m, const PairPotential& pot, double dt) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-15;
  cfg.t_end = s.t + dt;
  cfg.sample_interval = dt;
  State out = integrate(s, m, pot, cfg).samples().back();
  out.t = 0.0;
  return out;
}

inline Scenario figure_eight() {
  const MassSystem m(Vector::Ones(3), 1.0);
  const PairPotential pot = PairPotential::newtonian();
  const EightParams published{0.97000436, -0.24308753, -0.93240737, -0.86473146, 6.32591398};
  const EightParams refined = refine_figure_eight(published, m, pot, 2);
  // Start a twelfth of a period after the Euler syzygy at the published epoch
  // so that no degeneration instant sits on the initial sample.
  State s0 = advance(eight_state(refined), m, pot, refined.period / 12.0);
  return {"figure_eight", scenario_catalog()[0].description, m, pot, s0, refined.period, refined.period, 0, true};
}

/// Equilateral relative equilibrium of unit side rotating about the centre of mass.
inline State lagrange_state(const MassSystem& m, double& period) {
  const double side = 1.0, radius = side / std::sqrt(3.0);
  const double omega = std::sqrt(m.G() * m.total_mass() / (side * side * side));
  State s0;
  s0.q.resize(2, 3);
  for (int a = 0; a < 3; ++a) {
    const double phi = M_PI / 2 + 2.0 * M_PI * a / 3.0;
    s0.q.col(a) << radius * std::cos(phi), radius * std::sin(phi);
  }
  s0.q = s0.q.colwise() - center_of_mass(s0.q, m);
  s0.v.resize(2, 3);
  for (int a = 0; a < 3; ++a) s0.v.col(a) << -omega * s0.q(1, a), omega * s0.q(0, a);
  period = 2.0 * M_PI / omega;
  return s0;
}

// Routh's criterion 27 (m1 m2 + m1 m3 + m2 m3) < M^2 holds for these masses.
inline Scenario lagrange_rotating() {
  Vector masses(3);
  masses << 1.0, 0.01, 0.01;
  const MassSystem m(masses, 1.0);
  double period = 0.0;
  const State s0 = lagrange_state(m, period);
  return {"lagrange_rotating", scenario_catalog()[1].description, m, PairPotential::newtonian(), s0, period, period, 0,
          false};
}

inline Scenario lagrange_rotating_equal() {
  const MassSystem m(Vector::Ones(3), 1.0);
  double period = 0.0;
  const State s0 = lagrange_state(m, period);
  return {"lagrange_rotating_equal", scenario_catalog()[2].description, m, PairPotential::newtonian(), s0, period,
          period, 0, false};
}

/// Ratio K/|V| the tetrahedron velocities are scaled to.
inline constexpr double kTetrahedronVirialRatio = 0.15;

inline Scenario perturbed_tetrahedron(std::uint64_t seed = 0) {
  const MassSystem m(Vector::Ones(4), 1.0);
  const PairPotential pot = PairPotential::newtonian();
  const double s = 1.0 / (2.0 * std::sqrt(2.0));
  State s0;
  s0.q = column_matrix({{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}});
  std::mt19937_64 eng(seed);
  s0.v.resize(3, 4);
  for (Eigen::Index a = 0; a < 4; ++a)
    for (Eigen::Index i = 0; i < 3; ++i) s0.v(i, a) = uniform_from(eng, -1.0, 1.0);
  s0.v = s0.v.colwise() - linear_momentum(s0.v, m) / m.total_mass();
  s0.v = zero_am_projection(s0.q, s0.v, m).velocity;
  const double k = kinetic_energy(s0.v, m), v = potential_value(s0.q, m, pot);
  s0.v *= std::sqrt(kTetrahedronVirialRatio * std::abs(v) / k);
  return {"perturbed_tetrahedron", scenario_catalog()[3].description, m, pot, s0, std::nullopt, 20.0, seed, true};
}

inline Scenario gerver_escape() {
  const MassSystem m(Vector::Ones(4), 1.0);
  const double side = 1.0, radius = side / std::sqrt(3.0), height = 5.0;
  const double omega = std::sqrt(3.0 * m.G() / (side * side * side));
  const double rel_speed = 1.5;  // above the escape speed sqrt(2 G M / height)
  State s0;
  s0.q = Matrix::Zero(3, 4);
  s0.v = Matrix::Zero(3, 4);
  for (int a = 0; a < 3; ++a) {
    const double phi = M_PI / 2 + 2.0 * M_PI * a / 3.0;
    s0.q.col(a) << radius * std::cos(phi), radius * std::sin(phi), 0.0;
    s0.v.col(a) << -omega * s0.q(1, a), omega * s0.q(0, a), 0.0;
  }
  s0.q(2, 3) = height;
  s0.v(2, 3) = rel_speed;
  s0.q = s0.q.colwise() - center_of_mass(s0.q, m);
  s0.v = s0.v.colwise() - linear_momentum(s0.v, m) / m.total_mass();
  return {"gerver_escape", scenario_catalog()[4].description, m, PairPotential::newtonian(), s0, std::nullopt, 20.0, 0,
          false};
}

}  // namespace detail

/// Builds a catalogued scenario; ConfigError lists the valid names otherwise.
inline Scenario make_scenario(const std::string& name, std::uint64_t seed = 0) {
  if (name == "figure_eight") return detail::figure_eight();
  if (name == "lagrange_rotating") return detail::lagrange_rotating();
  if (name == "lagrange_rotating_equal") return detail::lagrange_rotating_equal();
  if (name == "perturbed_tetrahedron") return detail::perturbed_tetrahedron(seed);
  if (name == "gerver_escape") return detail::gerver_escape();
  std::string valid;
  for (const auto& s : scenario_catalog()) valid += (valid.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scenario '" + name + "'; valid names: " + valid);
}

}  // namespace coplanar
