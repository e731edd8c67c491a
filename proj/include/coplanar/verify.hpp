#pragma once

// Quantitative checks of the oscillation picture along computed
// trajectories: the ratio g = -S''/S, the sign pattern of S'' between
// degenerations, the maximal gap between degenerations, and probes along
// straight lines leaving a planar configuration in the normal direction.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "coplanar/dynamics.hpp"
#include "coplanar/errors.hpp"
#include "coplanar/events.hpp"
#include "coplanar/linalg.hpp"
#include "coplanar/potentials.hpp"
#include "coplanar/reduction.hpp"

namespace coplanar {

struct VerifyOptions {
  double eps_s_rel = 1e-3;       // mask |S| <= eps_s_rel * ||reduce(q)||
  double eps_margin_rel = 1e-3;  // mask margin <= eps_margin_rel * ||reduce(q)||
  double stencil_step = 1e-2;    // largest h of the five-point second difference
  double stencil_fraction = 0.05;  // h <= stencil_fraction * local free-fall time
  double concavity_fraction = 0.99;
  double bound_slack = 1e-3;     // g >= GM delta (1 - slack) counts as satisfying the bound
  double zero_j_rel = 1e-8;      // ||J|| relative to ||q|| ||v|| above this is "nonzero"
};

/// Threads used by verification sweeps: hardware concurrency, capped by
/// COPLANAR_THREADS when set to a positive integer.
inline unsigned verification_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COPLANAR_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

namespace detail {

template <class F>
void parallel_for(std::size_t count, F&& body) {
  const std::size_t workers = std::min<std::size_t>(verification_threads(), std::max<std::size_t>(1, count / 64));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shape signal: S, singular margin and configuration scale as functions of t.

struct ShapeSample {
  double s = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  double time_scale = std::numeric_limits<double>::infinity();  // sqrt(r_min^3 / GM)
};

using ShapeSignal = std::function<ShapeSample(double)>;

inline ShapeSignal shape_signal(const Trajectory& traj) {
  const double gm = traj.masses().G() * traj.masses().total_mass();
  return [&traj, gm](double t) {
    const State st = dense_eval(traj, t);
    const Matrix r = reduce(st.q, traj.masses());
    const auto dm = distance_and_margin(r);
    const double rmin = pair_extent(st.q).min_distance;
    return ShapeSample{dm.signed_distance, dm.margin, r.norm(), std::sqrt(rmin * rmin * rmin / gm)};
  };
}

/// Stencil step at a node: the configured step, shortened during close
/// encounters so that the stencil resolves the local motion.
inline double stencil_at(const ShapeSample& c, const VerifyOptions& opt) {
  return std::min(opt.stencil_step, opt.stencil_fraction * c.time_scale);
}

/// Five-point central second difference.
inline double second_difference(const std::function<double(double)>& f, double t, double h) {
  return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (12 * h * h);
}

/// Scalar part of a GEstimate, as stored in run reports.
struct GSummary {
  double lower_bound = 0.0;
  double c_observed = 0.0;
  double min_g = std::numeric_limits<double>::infinity();
  std::size_t nodes = 0;
  std::size_t unmasked = 0;
  std::size_t nonpositive = 0;
  std::size_t below_bound = 0;
  bool diagnostic_only = false;

  friend bool operator==(const GSummary&, const GSummary&) = default;
};

struct GEstimate {
  std::vector<double> times;
  std::vector<double> s;
  std::vector<double> g;       // NaN where masked
  std::vector<bool> masked;
  double lower_bound = 0.0;    // G M delta(c_observed)
  double c_observed = 0.0;
  double min_g = std::numeric_limits<double>::infinity();  // over unmasked nodes
  std::size_t unmasked = 0;
  std::size_t nonpositive = 0;
  std::size_t below_bound = 0;
  bool diagnostic_only = false;  // nonzero angular momentum: the bound is not asserted

  bool bound_holds() const { return !diagnostic_only && nonpositive == 0 && below_bound == 0; }

  GSummary summary() const {
    return {lower_bound, c_observed, min_g, times.size(), unmasked, nonpositive, below_bound, diagnostic_only};
  }
};

/// g = -S''/S at the given nodes.  Nodes closer than two stencil steps to
/// either end of [t_lo, t_hi] are dropped.
inline GEstimate estimate_g_series(const ShapeSignal& signal, const std::vector<double>& nodes, double t_lo,
                                   double t_hi, double lower_bound, const VerifyOptions& opt = {}) {
  const double h = opt.stencil_step;
  if (!(t_hi - t_lo > 4 * h)) throw PreconditionError("estimate_g_series: time span shorter than the stencil");
  GEstimate out;
  out.lower_bound = lower_bound;
  for (double t : nodes)
    if (t - 2 * h >= t_lo && t + 2 * h <= t_hi) out.times.push_back(t);
  const std::size_t n = out.times.size();
  out.s.assign(n, 0.0);
  out.g.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.masked.assign(n, true);

  std::vector<char> masked(n, 1);
  detail::parallel_for(n, [&](std::size_t i) {
    const double t = out.times[i];
    const ShapeSample c = signal(t);
    out.s[i] = c.s;
    if (std::abs(c.s) <= opt.eps_s_rel * c.scale || c.margin <= opt.eps_margin_rel * c.scale) return;
    const double hl = stencil_at(c, opt);
    auto s_of = [&](double x) { return signal(x).s; };
    const double s2 =
        (-s_of(t - 2 * hl) + 16 * s_of(t - hl) - 30 * c.s + 16 * s_of(t + hl) - s_of(t + 2 * hl)) / (12 * hl * hl);
    out.g[i] = -s2 / c.s;
    masked[i] = 0;
  });

  const double threshold = lower_bound * (1.0 - opt.bound_slack);
  for (std::size_t i = 0; i < n; ++i) {
    out.masked[i] = masked[i] != 0;
    if (out.masked[i]) continue;
    ++out.unmasked;
    out.min_g = std::min(out.min_g, out.g[i]);
    if (!(out.g[i] > 0.0)) ++out.nonpositive;
    if (!(out.g[i] >= threshold)) ++out.below_bound;
  }
  return out;
}

inline bool has_zero_angular_momentum(const Trajectory& traj, const VerifyOptions& opt = {}) {
  const State& s0 = traj.samples().front();
  const MassSystem& m = traj.masses();
  const double scale = mass_norm(s0.q.colwise() - center_of_mass(s0.q, m), m) * mass_norm(s0.v, m);
  const double j = std::max(traj.conservation().max_j_norm, bivector_norm(angular_momentum(s0.q, s0.v, m)));
  return j <= opt.zero_j_rel * (scale > 0.0 ? scale : 1.0);
}

inline GEstimate estimate_g_series(const Trajectory& traj, const VerifyOptions& opt = {}) {
  const double c = traj.max_pair_distance();
  const double bound = traj.masses().G() * traj.masses().total_mass() * delta_bound(traj.potential(), c, traj.masses());
  GEstimate out = estimate_g_series(shape_signal(traj), traj.sample_times(), traj.t_start(), traj.t_end(), bound, opt);
  out.c_observed = c;
  out.diagnostic_only = !has_zero_angular_momentum(traj, opt);
  return out;
}

// ---------------------------------------------------------------------------
// Sign of S'' on the intervals between degenerations.

struct SignSegment {
  double t_lo = 0.0;
  double t_hi = 0.0;
  int sign = 0;             // sign of S on the segment
  std::size_t checked = 0;  // unmasked interior nodes
  std::size_t agreeing = 0; // nodes with sign(S'') = -sign(S)
  bool skipped = false;     // too short for the stencil and guard band

  double fraction() const { return checked ? static_cast<double>(agreeing) / static_cast<double>(checked) : 1.0; }
  friend bool operator==(const SignSegment&, const SignSegment&) = default;
};

struct SegmentReport {
  std::vector<SignSegment> segments;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t checked_nodes = 0;
  std::size_t agreeing_nodes = 0;
  double required_fraction = 0.99;

  double overall_fraction() const {
    return checked_nodes ? static_cast<double>(agreeing_nodes) / static_cast<double>(checked_nodes) : 1.0;
  }
  bool passed() const { return failed == 0 && overall_fraction() >= required_fraction; }
  friend bool operator==(const SegmentReport&, const SegmentReport&) = default;
};

/// Splits [t_lo, t_hi] at the event times and checks sign(S'') = -sign(S) at
/// the nodes of each piece, away from a guard band of two stencil widths.
inline SegmentReport check_concavity_segments(const ShapeSignal& signal, const std::vector<double>& nodes,
                                              const std::vector<double>& event_times, double t_lo, double t_hi,
                                              const VerifyOptions& opt = {}) {
  const double h = opt.stencil_step, guard = 2.0 * (4.0 * h);
  SegmentReport rep;
  rep.required_fraction = opt.concavity_fraction;
  std::vector<double> cuts{t_lo};
  for (double t : event_times)
    if (t > t_lo && t < t_hi) cuts.push_back(t);
  cuts.push_back(t_hi);
  std::sort(cuts.begin(), cuts.end());

  auto s_of = [&](double x) { return signal(x).s; };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    SignSegment seg;
    seg.t_lo = cuts[k];
    seg.t_hi = cuts[k + 1];
    const double lo = seg.t_lo + guard, hi = seg.t_hi - guard;
    if (!(hi > lo)) {
      seg.skipped = true;
      ++rep.skipped;
      rep.segments.push_back(seg);
      continue;
    }
    seg.sign = detail::sign_of(s_of(0.5 * (seg.t_lo + seg.t_hi)));
    std::vector<double> inside;
    for (double t : nodes)
      if (t >= lo && t <= hi) inside.push_back(t);
    std::vector<char> ok(inside.size(), 0), used(inside.size(), 0);
    detail::parallel_for(inside.size(), [&](std::size_t i) {
      const double t = inside[i];
      const ShapeSample c = signal(t);
      if (std::abs(c.s) <= opt.eps_s_rel * c.scale || c.margin <= opt.eps_margin_rel * c.scale) return;
      used[i] = 1;
      ok[i] = detail::sign_of(second_difference(s_of, t, stencil_at(c, opt))) == -detail::sign_of(c.s);
    });
    for (std::size_t i = 0; i < inside.size(); ++i) {
      seg.checked += used[i];
      seg.agreeing += used[i] && ok[i];
    }
    rep.checked_nodes += seg.checked;
    rep.agreeing_nodes += seg.agreeing;
    if (seg.fraction() < opt.concavity_fraction) ++rep.failed;
    rep.segments.push_back(seg);
  }
  return rep;
}

inline std::vector<double> event_times(const std::vector<DegenerationEvent>& events) {
  std::vector<double> t;
  t.reserve(events.size());
  for (const auto& e : events) t.push_back(e.t_star);
  return t;
}

inline SegmentReport check_concavity_segments(const Trajectory& traj, const std::vector<DegenerationEvent>& events,
                                              const VerifyOptions& opt = {}) {
  return check_concavity_segments(shape_signal(traj), traj.sample_times(), event_times(events), traj.t_start(),
                                  traj.t_end(), opt);
}

inline SegmentReport check_concavity_segments(const Trajectory& traj, const VerifyOptions& opt = {}) {
  return check_concavity_segments(traj, scan_degenerations(traj, traj.masses()), opt);
}

// ---------------------------------------------------------------------------
// Maximal gap between degenerations.

struct HypothesisFlags {
  bool nonzero_j = false;
  bool unbounded_suspected = false;
  bool collision_truncated = false;

  bool any() const { return nonzero_j || unbounded_suspected || collision_truncated; }
  friend bool operator==(const HypothesisFlags&, const HypothesisFlags&) = default;
};

/// An event-free stretch of the run longer than the window.  Every window
/// position inside [t_lo, t_hi] is a violating window.
struct WindowViolation {
  double t_lo = 0.0;
  double t_hi = 0.0;
  friend bool operator==(const WindowViolation&, const WindowViolation&) = default;
};

struct OscillationReport {
  double c_observed = 0.0;
  double delta = 0.0;
  double omega = 0.0;
  double window = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t events = 0;
  std::size_t windows_checked = 0;  // grid positions, step window/100
  std::size_t windows_empty = 0;
  std::vector<WindowViolation> violations;
  HypothesisFlags flags;

  bool confirmed() const { return violations.empty() && windows_checked > 0; }
  bool hypotheses_met() const { return !flags.any(); }
  friend bool operator==(const OscillationReport&, const OscillationReport&) = default;
};

/// Window sweep over [t_start, t_end] given event times.  Violations are the
/// maximal event-free intervals (run ends count as boundaries) longer than
/// the window, so the result is monotone in the window length.  The fixed
/// grid of window positions is counted as well.
inline OscillationReport check_window_bound(std::vector<double> events, double t_start, double t_end, double window) {
  if (!(window > 0.0)) throw InputError("check_window_bound: window must be positive");
  std::sort(events.begin(), events.end());
  OscillationReport rep;
  rep.window = window;
  rep.t_start = t_start;
  rep.t_end = t_end;
  rep.events = events.size();

  std::vector<double> marks{t_start};
  for (double t : events)
    if (t >= t_start && t <= t_end) marks.push_back(t);
  marks.push_back(t_end);
  for (std::size_t i = 0; i + 1 < marks.size(); ++i)
    if (marks[i + 1] - marks[i] > window) rep.violations.push_back({marks[i], marks[i + 1]});

  const double step = window / 100.0;
  if (t_end - t_start >= window) {
    const auto count = static_cast<std::size_t>(std::floor((t_end - t_start - window) / step)) + 1;
    std::vector<char> empty(count, 0);
    detail::parallel_for(count, [&](std::size_t k) {
      const double a = t_start + static_cast<double>(k) * step;
      const auto it = std::lower_bound(events.begin(), events.end(), a);
      empty[k] = it == events.end() || *it > a + window;
    });
    rep.windows_checked = count;
    for (char e : empty) rep.windows_empty += e;
  }
  return rep;
}

/// True when, at the end of the run, some body recedes from the centre of mass
/// of the others with nonnegative energy relative to them (relative kinetic
/// energy plus its pair potentials with the others).  For potentials that
/// vanish at infinity.
inline bool escape_at_end(const Trajectory& traj) {
  const State& s = traj.samples().back();
  const MassSystem& m = traj.masses();
  for (Eigen::Index a = 0; a < m.bodies(); ++a) {
    const double rest = m.total_mass() - m.mass(a);
    const Vector com_rest = (s.q * m.masses() - m.mass(a) * s.q.col(a)) / rest;
    const Vector vel_rest = (s.v * m.masses() - m.mass(a) * s.v.col(a)) / rest;
    const Vector r = s.q.col(a) - com_rest, u = s.v.col(a) - vel_rest;
    double energy = 0.5 * m.mass(a) * rest / m.total_mass() * u.squaredNorm();
    for (Eigen::Index b = 0; b < m.bodies(); ++b)
      if (b != a) energy += m.G() * m.mass(a) * m.mass(b) * traj.potential().pair(a, b, (s.q.col(a) - s.q.col(b)).norm()).f;
    if (r.dot(u) > 0.0 && energy >= 0.0) return true;
  }
  return false;
}

/// Heuristic flags for the hypotheses of the gap bound: zero angular momentum,
/// a bounded orbit (suspected unbounded when the energy is nonnegative or a
/// body is escaping at the end of the run) and no collision-guard truncation.
inline HypothesisFlags hypothesis_flags(const Trajectory& traj, const VerifyOptions& opt = {}) {
  HypothesisFlags f;
  f.nonzero_j = !has_zero_angular_momentum(traj, opt);
  f.unbounded_suspected = traj.diagnostics().front().energy >= 0.0 || escape_at_end(traj);
  f.collision_truncated = traj.termination() == Termination::collision_guard;
  return f;
}

inline OscillationReport check_window_bound(const Trajectory& traj, const std::vector<DegenerationEvent>& events,
                                            const MassSystem& m, const PairPotential& p,
                                            const VerifyOptions& opt = {}) {
  const double c = traj.max_pair_distance();
  const double delta = delta_bound(p, c, m);
  const double omega = std::sqrt(m.G() * m.total_mass() * delta);
  OscillationReport rep = check_window_bound(event_times(events), traj.t_start(), traj.t_end(), M_PI / omega);
  rep.c_observed = c;
  rep.delta = delta;
  rep.omega = omega;
  rep.flags = hypothesis_flags(traj, opt);
  return rep;
}

// ---------------------------------------------------------------------------
// Straight lines leaving a planar configuration along the common normal.

struct NormalGeodesicProbe {
  FullConfiguration q0;  // centred planar base configuration
  FullVelocity v;        // v_a = w_a n, sum m_a v_a = 0, ||v||_mass = 1
  Vector normal;
  double j_norm = 0.0;
  double momentum_norm = 0.0;
  double max_r2_law_error = 0.0;  // relative
  std::vector<double> t;
  std::vector<double> s;          // S along q0 + t v
  std::vector<double> g1;         // G sum_{a<b} m_a m_b (f'_ab/r_ab) |v_ab|^2
  std::vector<double> g_numeric;  // <grad S, -grad V> / (-S) by finite differences
  double max_rel_disagreement = 0.0;
};

namespace detail {

// Fourth-order central gradient of f at r (Frobenius coordinates).
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& r, double h) {
  Matrix grad(r.rows(), r.cols());
  Matrix x = r;
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      const double keep = x(i, j);
      auto at = [&](double off) {
        x(i, j) = keep + off;
        const double y = f(x);
        x(i, j) = keep;
        return y;
      };
      grad(i, j) = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    }
  return grad;
}

}  // namespace detail

/// Planarity tolerance for the probe base (smallest over largest singular
/// value of the centred positions).
inline constexpr double kPlanarRelTol = 1e-10;

inline NormalGeodesicProbe normal_geodesic_probe(const FullConfiguration& q0_planar, const MassSystem& m,
                                                 const PairPotential& p, const std::vector<double>& t_values) {
  detail::require_shape(q0_planar, m, "normal_geodesic_probe");
  const Eigen::Index d = m.dimension(), n = m.bodies();
  if (n != d + 1) throw InputError("normal_geodesic_probe: needs d + 1 bodies");
  NormalGeodesicProbe out;
  out.q0 = q0_planar.colwise() - center_of_mass(q0_planar, m);

  Eigen::JacobiSVD<Matrix> svd(out.q0, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(d - 1) > kPlanarRelTol * sv(0))
    throw PreconditionError("normal_geodesic_probe: base configuration is not planar");
  out.normal = svd.matrixU().col(d - 1);

  // w in the kernel of [m_a (in-plane coordinates of q_a); m_a].
  Matrix constraints(d, n);
  constraints.topRows(d - 1) = svd.matrixU().leftCols(d - 1).transpose() * out.q0;
  constraints.row(d - 1).setOnes();
  constraints = (constraints * m.masses().asDiagonal()).eval();
  Eigen::JacobiSVD<Matrix> ker(constraints, Eigen::ComputeFullV);
  Vector w = ker.matrixV().col(n - 1);
  w /= std::sqrt(w.cwiseAbs2().dot(m.masses()));
  out.v = out.normal * w.transpose();

  const double probe = 1e-6 * sv(0);
  if (signed_distance(reduce(out.q0 + probe * out.v, m)) < 0.0) {
    w = -w;
    out.v = -out.v;
  }
  out.j_norm = bivector_norm(angular_momentum(out.q0, out.v, m));
  out.momentum_norm = linear_momentum(out.v, m).norm();

  const Matrix r0 = pair_distances(out.q0);
  const double h = 1e-4 * reduce(out.q0, m).norm();
  auto potential_of = [&](const Matrix& r) { return potential_value(embed(r, m), m, p); };
  auto distance_of = [](const Matrix& r) { return signed_distance(r); };

  for (double t : t_values) {
    if (t == 0.0) throw InputError("normal_geodesic_probe: t = 0 lies on the degeneration locus");
    const FullConfiguration q = out.q0 + t * out.v;
    double g1 = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b) {
        const double vab2 = (out.v.col(a) - out.v.col(b)).squaredNorm();
        const double r2 = (q.col(a) - q.col(b)).squaredNorm();
        const double law = r0(a, b) * r0(a, b) + t * t * vab2;
        out.max_r2_law_error = std::max(out.max_r2_law_error, std::abs(r2 - law) / law);
        g1 += m.mass(a) * m.mass(b) * p.df_over_r(a, b, std::sqrt(law)) * vab2;
      }
    g1 *= m.G();

    const Matrix r = reduce(q, m);
    const double s = signed_distance(r);
    const Matrix grad_s = detail::fd_gradient(distance_of, r, h);
    const Matrix grad_v = detail::fd_gradient(potential_of, r, h);
    const double g_num = (grad_s.cwiseProduct(-grad_v)).sum() / (-s);

    out.t.push_back(t);
    out.s.push_back(s);
    out.g1.push_back(g1);
    out.g_numeric.push_back(g_num);
    out.max_rel_disagreement = std::max(out.max_rel_disagreement, std::abs(g_num - g1) / std::abs(g1));
  }
  return out;
}

}  // namespace coplanar
