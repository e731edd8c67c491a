#pragma once

// Time integration of q'' = -grad V with dense output, sampled diagnostics and
// a collision guard.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coplanar/errors.hpp"
#include "coplanar/linalg.hpp"
#include "coplanar/potentials.hpp"
#include "coplanar/reduction.hpp"

namespace coplanar {

struct State {
  double t = 0.0;
  FullConfiguration q;
  FullVelocity v;
};

enum class IntegratorKind { rk4_fixed, adaptive_embedded };

inline std::string to_string(IntegratorKind k) {
  return k == IntegratorKind::rk4_fixed ? "rk4_fixed" : "adaptive_embedded";
}

struct IntegratorConfig {
  IntegratorKind kind = IntegratorKind::adaptive_embedded;
  double step = 1e-3;  // rk4_fixed only
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double t_end = 1.0;
  double sample_interval = 1e-2;
  /// Defaults to 1e-6 times the initial largest mutual distance.
  std::optional<double> collision_radius;
  std::size_t max_steps = 100'000'000;
};

/// Raised when the adaptive step collapses; carries the last accepted state.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, State last) : Error(what), last_(std::move(last)) {}
  const State& last_good_state() const { return last_; }

 private:
  State last_;
};

/// Per-sample diagnostics.
struct SampleDiagnostics {
  double energy;
  double j_norm;
  double p_norm;
  double r_max;
  double r_min;
  double signed_distance;
  double det;
  double margin;
};

struct ConservationReport {
  double max_rel_energy_drift = 0.0;
  double max_j_norm = 0.0;
  double max_rel_j_drift = 0.0;
  double max_p_norm = 0.0;
  double max_p_drift = 0.0;

  friend bool operator==(const ConservationReport&, const ConservationReport&) = default;
};

enum class Termination { completed, collision_guard };

/// One integrator step with its continuous extension
/// y(t0 + th*h) = c0 + th (c1 + (1-th) (c2 + th (c3 + (1-th) c4))).
struct DenseSegment {
  double t0;
  double h;
  Matrix coeffs;  // n x 5
};

class Trajectory {
 public:
  Trajectory(MassSystem masses, PairPotential potential) : masses_(std::move(masses)), potential_(std::move(potential)) {}

  const MassSystem& masses() const { return masses_; }
  const PairPotential& potential() const { return potential_; }
  const std::vector<State>& samples() const { return samples_; }
  const std::vector<SampleDiagnostics>& diagnostics() const { return diagnostics_; }
  const std::vector<DenseSegment>& segments() const { return segments_; }
  const ConservationReport& conservation() const { return conservation_; }
  Termination termination() const { return termination_; }
  const std::string& termination_reason() const { return reason_; }
  std::size_t accepted_steps() const { return segments_.size(); }
  std::size_t rejected_steps() const { return rejected_; }

  double t_start() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }
  std::vector<double> sample_times() const {
    std::vector<double> t;
    t.reserve(samples_.size());
    for (const auto& s : samples_) t.push_back(s.t);
    return t;
  }

  /// Largest mutual distance over all samples.
  double max_pair_distance() const {
    double c = 0.0;
    for (const auto& d : diagnostics_) c = std::max(c, d.r_max);
    return c;
  }

  /// Trajectory through the given time-ordered states, joined by cubic
  /// Hermite segments built from (v, accel).  With an empty accelerations list
  /// the accelerations of the potential are used.  For synthetic paths.
  static Trajectory from_samples(MassSystem masses, PairPotential potential, std::vector<State> states,
                                 std::vector<Matrix> accelerations = {});

 private:
  friend Trajectory integrate(const State&, const MassSystem&, const PairPotential&, const IntegratorConfig&);

  void finalize(const State& s0);

  MassSystem masses_;
  PairPotential potential_;
  std::vector<State> samples_;
  std::vector<SampleDiagnostics> diagnostics_;
  std::vector<DenseSegment> segments_;
  ConservationReport conservation_;
  Termination termination_ = Termination::completed;
  std::string reason_ = "completed";
  std::size_t rejected_ = 0;
};

inline double total_energy(const State& s, const MassSystem& m, const PairPotential& p) {
  return kinetic_energy(s.v, m) + potential_value(s.q, m, p);
}

inline SampleDiagnostics diagnose(const State& s, const MassSystem& m, const PairPotential& p) {
  const Matrix r = reduce(s.q, m);
  const auto dm = distance_and_margin(r);
  const auto ext = pair_extent(s.q);
  return {total_energy(s, m, p),
          bivector_norm(angular_momentum(s.q, s.v, m)),
          linear_momentum(s.v, m).norm(),
          ext.max_distance,
          ext.min_distance,
          dm.signed_distance,
          r.determinant(),
          dm.margin};
}

namespace detail {

// Phase-space vector layout: [q (column-major d x N), v (column-major d x N)].
inline Vector pack(const State& s) {
  const Eigen::Index n = s.q.size();
  Vector y(2 * n);
  y.head(n) = Eigen::Map<const Vector>(s.q.data(), n);
  y.tail(n) = Eigen::Map<const Vector>(s.v.data(), n);
  return y;
}

inline State unpack(double t, const Vector& y, Eigen::Index d, Eigen::Index bodies) {
  const Eigen::Index n = d * bodies;
  State s{t, Eigen::Map<const Matrix>(y.data(), d, bodies), Eigen::Map<const Matrix>(y.data() + n, d, bodies)};
  return s;
}

struct NewtonField {
  const MassSystem& m;
  const PairPotential& p;
  Eigen::Index d, bodies;

  void operator()(const Vector& y, Vector& dy) const {
    const Eigen::Index n = d * bodies;
    dy.head(n) = y.tail(n);
    Eigen::Map<const Matrix> q(y.data(), d, bodies);
    Eigen::Map<Matrix> acc(dy.data() + n, d, bodies);
    acceleration_into(q, m, p, acc);
  }

  double min_distance(const Vector& y) const {
    Eigen::Map<const Matrix> q(y.data(), d, bodies);
    return pair_extent(q).min_distance;
  }
};

inline Vector eval_segment(const DenseSegment& seg, double t) {
  const double th = (t - seg.t0) / seg.h;
  const double th1 = 1.0 - th;
  const auto& c = seg.coeffs;
  return c.col(0) + th * (c.col(1) + th1 * (c.col(2) + th * (c.col(3) + th1 * c.col(4))));
}

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

// Collects samples on the grid t_start + k*dt as steps are accepted.
class Sampler {
 public:
  Sampler(double t0, double dt, Eigen::Index d, Eigen::Index bodies) : t0_(t0), dt_(dt), d_(d), bodies_(bodies) {}

  void push_initial(double t, const Vector& y, std::vector<State>& out) {
    out.push_back(unpack(t, y, d_, bodies_));
    next_ = 1;
  }

  void push_segment(const DenseSegment& seg, double t_hi, const Vector& y_end, std::vector<State>& out) {
    for (;;) {
      const double tk = t0_ + static_cast<double>(next_) * dt_;
      if (tk > t_hi) break;
      out.push_back(unpack(tk, tk == t_hi ? y_end : eval_segment(seg, tk), d_, bodies_));
      ++next_;
    }
  }

  void close(double t_final, const Vector& y_final, std::vector<State>& out) {
    if (out.back().t < t_final) out.push_back(unpack(t_final, y_final, d_, bodies_));
  }

 private:
  double t0_, dt_;
  Eigen::Index d_, bodies_;
  std::size_t next_ = 0;
};

inline double rms_norm(const Vector& v, const Vector& scale) {
  return std::sqrt((v.array() / scale.array()).square().mean());
}

}  // namespace detail

/// Integrates Newton's equations from s0 to cfg.t_end (or the first collision
/// guard trip) and attaches diagnostics and a conservation report.
inline Trajectory integrate(const State& s0, const MassSystem& m, const PairPotential& p, const IntegratorConfig& cfg) {
  detail::require_shape(s0.q, m, "integrate");
  detail::require_shape(s0.v, m, "integrate");
  if (!(cfg.t_end > s0.t)) throw InputError("integrate: t_end must exceed the initial time");
  if (!(cfg.sample_interval > 0.0)) throw InputError("integrate: sample_interval must be positive");
  if (cfg.kind == IntegratorKind::adaptive_embedded && (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)))
    throw InputError("integrate: tolerances must be positive");
  if (cfg.kind == IntegratorKind::rk4_fixed && !(cfg.step > 0.0)) throw InputError("integrate: step must be positive");

  const Eigen::Index d = m.dimension(), bodies = m.bodies();
  const auto extent0 = pair_extent(s0.q);
  const double r_guard = cfg.collision_radius.value_or(1e-6 * extent0.max_distance);
  if (!(extent0.min_distance > r_guard))
    throw PreconditionError("integrate: initial mutual distance below the collision radius");

  Trajectory traj(m, p);
  detail::NewtonField field{traj.masses_, traj.potential_, d, bodies};
  detail::Sampler sampler(s0.t, cfg.sample_interval, d, bodies);

  Vector y = detail::pack(s0);
  const Eigen::Index n = y.size();
  double t = s0.t;
  sampler.push_initial(t, y, traj.samples_);

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), ys(n);
  field(y, k1);

  auto accept = [&](double h, const Vector& y_new, Matrix coeffs, bool final_step) -> bool {
    const double t_new = final_step ? cfg.t_end : t + h;
    traj.segments_.push_back({t, h, std::move(coeffs)});
    sampler.push_segment(traj.segments_.back(), t_new, y_new, traj.samples_);
    t = t_new;
    y = y_new;
    if (field.min_distance(y) < r_guard) {
      traj.termination_ = Termination::collision_guard;
      traj.reason_ = "collision guard: mutual distance below " + std::to_string(r_guard) + " at t = " + std::to_string(t);
      return false;
    }
    return true;
  };

  if (cfg.kind == IntegratorKind::rk4_fixed) {
    while (t < cfg.t_end) {
      if (traj.segments_.size() >= cfg.max_steps) throw IntegrationError("integrate: step limit reached", detail::unpack(t, y, d, bodies));
      const bool final_step = cfg.t_end - t <= cfg.step;
      const double h = final_step ? cfg.t_end - t : cfg.step;
      ys = y + 0.5 * h * k1;
      field(ys, k2);
      ys = y + 0.5 * h * k2;
      field(ys, k3);
      ys = y + h * k3;
      field(ys, k4);
      y1 = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      field(y1, k7);
      // cubic Hermite interpolant
      Matrix c(n, 5);
      c.col(0) = y;
      c.col(1) = y1 - y;
      c.col(2) = h * k1 - c.col(1);
      c.col(3) = c.col(1) - h * k7 - c.col(2);
      c.col(4).setZero();
      if (!accept(h, y1, std::move(c), final_step)) break;
      k1 = k7;
    }
  } else {
    using T = detail::Dopri5;
    auto scale_of = [&](const Vector& a, const Vector& b) {
      return Vector((cfg.abs_tol + cfg.rel_tol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix());
    };

    // Initial step (Hairer & Wanner, II.4).
    double h;
    {
      const Vector sc = scale_of(y, y);
      const double dn0 = detail::rms_norm(y, sc), dn1 = detail::rms_norm(k1, sc);
      double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
      h0 = std::min(h0, cfg.max_step);
      ys = y + h0 * k1;
      field(ys, k2);
      const double dn2 = detail::rms_norm(k2 - k1, sc) / h0;
      const double dm = std::max(dn1, dn2);
      const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
      h = std::min({100.0 * h0, h1, cfg.max_step, cfg.t_end - t});
    }

    bool last_rejected = false;
    while (t < cfg.t_end) {
      if (traj.segments_.size() >= cfg.max_steps)
        throw IntegrationError("integrate: step limit reached", detail::unpack(t, y, d, bodies));
      if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
        throw IntegrationError("integrate: step size underflow at t = " + std::to_string(t),
                               detail::unpack(t, y, d, bodies));
      bool final_step = false;
      if (t + h >= cfg.t_end) {
        h = cfg.t_end - t;
        final_step = true;
      }

      ys = y + h * (T::a21 * k1);
      field(ys, k2);
      ys = y + h * (T::a31 * k1 + T::a32 * k2);
      field(ys, k3);
      ys = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
      field(ys, k4);
      ys = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
      field(ys, k5);
      ys = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
      field(ys, k6);
      y1 = y + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
      field(y1, k7);

      const Vector err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
      const double en = detail::rms_norm(err, scale_of(y, y1));
      if (!std::isfinite(en)) {
        h *= 0.1;
        last_rejected = true;
        ++traj.rejected_;
        continue;
      }
      const double fac = 0.9 * std::pow(std::max(en, 1e-300), -0.2);
      if (en <= 1.0) {
        Matrix c(n, 5);
        c.col(0) = y;
        c.col(1) = y1 - y;
        c.col(2) = h * k1 - c.col(1);
        c.col(3) = c.col(1) - h * k7 - c.col(2);
        c.col(4) = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
        const double h_used = h;
        if (!accept(h_used, y1, std::move(c), final_step)) break;
        k1 = k7;
        double grow = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
        h = std::min(h_used * grow, cfg.max_step);
        last_rejected = false;
      } else {
        h *= std::clamp(fac, 0.2, 1.0);
        last_rejected = true;
        ++traj.rejected_;
      }
    }
  }

  sampler.close(t, y, traj.samples_);
  traj.finalize(s0);
  return traj;
}

inline void Trajectory::finalize(const State& s0) {
  const MassSystem& m = masses_;
  diagnostics_.clear();
  diagnostics_.reserve(samples_.size());
  for (const auto& s : samples_) diagnostics_.push_back(diagnose(s, m, potential_));

  ConservationReport& rep = conservation_;
  rep = {};
  const SampleDiagnostics& first = diagnostics_.front();
  const Matrix j0 = angular_momentum(s0.q, s0.v, m);
  const Vector p0 = linear_momentum(s0.v, m);
  const double e_scale = std::abs(first.energy) > 0.0 ? std::abs(first.energy) : 1.0;
  const double j_scale = bivector_norm(j0) > 0.0 ? bivector_norm(j0) : 1.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    const auto& dg = diagnostics_[i];
    rep.max_rel_energy_drift = std::max(rep.max_rel_energy_drift, std::abs(dg.energy - first.energy) / e_scale);
    rep.max_j_norm = std::max(rep.max_j_norm, dg.j_norm);
    rep.max_rel_j_drift = std::max(rep.max_rel_j_drift, bivector_norm(angular_momentum(s.q, s.v, m) - j0) / j_scale);
    rep.max_p_norm = std::max(rep.max_p_norm, dg.p_norm);
    rep.max_p_drift = std::max(rep.max_p_drift, (linear_momentum(s.v, m) - p0).norm());
  }
}

inline Trajectory Trajectory::from_samples(MassSystem masses, PairPotential potential, std::vector<State> states,
                                           std::vector<Matrix> accelerations) {
  if (states.size() < 2) throw InputError("from_samples: need at least two states");
  if (!accelerations.empty() && accelerations.size() != states.size())
    throw InputError("from_samples: one acceleration per state required");
  Trajectory traj(std::move(masses), std::move(potential));
  const bool compute_accelerations = accelerations.empty();
  for (std::size_t i = 0; i < states.size(); ++i) {
    detail::require_shape(states[i].q, traj.masses_, "from_samples");
    detail::require_shape(states[i].v, traj.masses_, "from_samples");
    if (i > 0 && !(states[i].t > states[i - 1].t)) throw InputError("from_samples: times must increase strictly");
    if (compute_accelerations) accelerations.push_back(acceleration(states[i].q, traj.masses_, traj.potential_));
  }
  const Eigen::Index n = 2 * states.front().q.size();
  auto derivative = [&](std::size_t i) {
    State ds{states[i].t, states[i].v, accelerations[i]};
    return detail::pack(ds);
  };
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    const double h = states[i + 1].t - states[i].t;
    const Vector y0 = detail::pack(states[i]), y1 = detail::pack(states[i + 1]);
    Matrix c(n, 5);
    c.col(0) = y0;
    c.col(1) = y1 - y0;
    c.col(2) = h * derivative(i) - c.col(1);
    c.col(3) = c.col(1) - h * derivative(i + 1) - c.col(2);
    c.col(4).setZero();
    traj.segments_.push_back({states[i].t, h, std::move(c)});
  }
  traj.samples_ = std::move(states);
  traj.finalize(traj.samples_.front());
  return traj;
}

/// State at time t; exact at sample nodes, interpolated elsewhere.
inline State dense_eval(const Trajectory& traj, double t) {
  const auto& samples = traj.samples();
  if (!(t >= traj.t_start() && t <= traj.t_end()))
    throw RangeError("dense_eval: t = " + std::to_string(t) + " outside [" + std::to_string(traj.t_start()) + ", " +
                     std::to_string(traj.t_end()) + "]");
  auto node = std::lower_bound(samples.begin(), samples.end(), t, [](const State& s, double x) { return s.t < x; });
  if (node != samples.end() && node->t == t) return *node;

  const auto& segs = traj.segments();
  auto it = std::upper_bound(segs.begin(), segs.end(), t, [](double x, const DenseSegment& s) { return x < s.t0; });
  const DenseSegment& seg = it == segs.begin() ? segs.front() : *std::prev(it);
  return detail::unpack(t, detail::eval_segment(seg, t), traj.masses().dimension(), traj.masses().bodies());
}

/// Reduced configuration at time t.
inline Matrix reduced_at(const Trajectory& traj, double t) { return reduce(dense_eval(traj, t).q, traj.masses()); }

}  // namespace coplanar
