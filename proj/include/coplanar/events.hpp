#pragma once

// Degeneration instants along a trajectory and the shape alphabets used to
// name them: which mass is in the middle of a collinear triple (d = 2), and
// which of the seven generic planar quadrilateral types occurs (d = 3).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "coplanar/dynamics.hpp"
#include "coplanar/errors.hpp"
#include "coplanar/linalg.hpp"
#include "coplanar/reduction.hpp"

namespace coplanar {

enum class Alphabet { d2_syzygy, d3_coplanar, none };

enum class ShapeFamily {
  middle,    // d = 2: label of the mass between the other two
  convex,    // d = 3: convex quadrilateral, label opposite body 1
  interior,  // d = 3: label of the body inside the triangle of the others
  nongeneric
};

struct ShapeSymbol {
  Alphabet alphabet = Alphabet::none;
  ShapeFamily family = ShapeFamily::nongeneric;
  int label = 0;  // 1-based body label

  bool generic() const { return family != ShapeFamily::nongeneric; }

  std::string str() const {
    switch (family) {
      case ShapeFamily::middle: return std::to_string(label);
      case ShapeFamily::convex: return "X" + std::to_string(label);
      case ShapeFamily::interior: return "I" + std::to_string(label);
      case ShapeFamily::nongeneric: break;
    }
    return "?";
  }

  friend bool operator==(const ShapeSymbol&, const ShapeSymbol&) = default;
};

inline std::string to_string(Alphabet a) {
  switch (a) {
    case Alphabet::d2_syzygy: return "d2_syzygy";
    case Alphabet::d3_coplanar: return "d3_coplanar";
    case Alphabet::none: break;
  }
  return "none";
}

/// Parses the text produced by ShapeSymbol::str() for the given dimension.
inline ShapeSymbol parse_symbol(const std::string& s, Eigen::Index d) {
  const Alphabet alpha = d == 2 ? Alphabet::d2_syzygy : d == 3 ? Alphabet::d3_coplanar : Alphabet::none;
  if (s == "?") return {alpha, ShapeFamily::nongeneric, 0};
  auto digit = [&](std::size_t pos) {
    if (pos + 1 != s.size() || s[pos] < '1' || s[pos] > '9') throw InputError("bad shape symbol '" + s + "'");
    return s[pos] - '0';
  };
  if (d == 2) return {alpha, ShapeFamily::middle, digit(0)};
  if (d == 3 && !s.empty() && s[0] == 'X') return {alpha, ShapeFamily::convex, digit(1)};
  if (d == 3 && !s.empty() && s[0] == 'I') return {alpha, ShapeFamily::interior, digit(1)};
  throw InputError("bad shape symbol '" + s + "'");
}

struct DegenerationEvent {
  double t_star = 0.0;
  ShapeSymbol symbol;
  double residual = 0.0;  // |det| of the reduced configuration at t_star
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool grazing = false;  // tangency: |S| dips below threshold without a sign change
};

/// Relative flatness (smallest over largest singular value of the centred
/// positions) accepted as "lies on a hyperplane" by classify_shape.
inline constexpr double kDegenerateRelTol = 1e-6;
/// Relative triangle area under which three points count as collinear.
inline constexpr double kCollinearRelTol = 1e-8;
/// Grazing threshold on |S| relative to the configuration size.
inline constexpr double kGrazingRelTol = 1e-9;
/// Root refinement stops when the bracket is this small relative to max(1, |t|).
inline constexpr double kRootRelTimeTol = 1e-12;

namespace detail {

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

// Strictly inside triangle abc (any orientation).
inline bool strictly_inside(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const Eigen::Vector2d& c) {
  const double s1 = cross2(b - a, p - a), s2 = cross2(c - b, p - b), s3 = cross2(a - c, p - c);
  return (s1 > 0 && s2 > 0 && s3 > 0) || (s1 < 0 && s2 < 0 && s3 < 0);
}

}  // namespace detail

/// Names the shape of a degenerate configuration (all bodies on one
/// hyperplane).  d = 2: middle mass on the common line.  d = 3: convex hull of
/// the coplanar quadrilateral; X<k> if convex with k opposite body 1, I<j> if
/// body j is interior.  Any three collinear points give a nongeneric symbol.
inline ShapeSymbol classify_shape(const FullConfiguration& q, Eigen::Index d) {
  if (q.rows() != d || q.cols() != d + 1) throw InputError("classify_shape: expected a d x (d+1) configuration");
  if (!q.allFinite()) throw InputError("classify_shape: non-finite entry");
  const Vector centroid = q.rowwise().mean();
  const Matrix centred = q.colwise() - centroid;
  Eigen::JacobiSVD<Matrix> svd(centred, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  if (!(sv(0) > 0.0)) return {d == 2 ? Alphabet::d2_syzygy : d == 3 ? Alphabet::d3_coplanar : Alphabet::none,
                              ShapeFamily::nongeneric, 0};
  if (sv(d - 1) > kDegenerateRelTol * sv(0))
    throw PreconditionError("classify_shape: configuration is not degenerate (relative flatness " +
                            std::to_string(sv(d - 1) / sv(0)) + ")");

  const double scale = pair_extent(q).max_distance;
  if (d == 2) {
    const Vector along = svd.matrixU().col(0).transpose() * centred;
    const Vector across = svd.matrixU().col(1).transpose() * centred;
    if (across.cwiseAbs().maxCoeff() > kDegenerateRelTol * scale) {
      // Accepted by the flatness test but visibly bent: still name the middle mass.
    }
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        if (std::abs(along(a) - along(b)) <= kCollinearRelTol * scale)
          return {Alphabet::d2_syzygy, ShapeFamily::nongeneric, 0};  // binary collision shape
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return along(a) < along(b); });
    return {Alphabet::d2_syzygy, ShapeFamily::middle, order[1] + 1};
  }

  if (d == 3) {
    const Matrix plane = svd.matrixU().leftCols(2).transpose() * centred;  // 2 x 4
    std::array<Eigen::Vector2d, 4> p;
    for (int a = 0; a < 4; ++a) p[a] = plane.col(a);
    const double area_tol = kCollinearRelTol * scale * scale;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        for (int c = b + 1; c < 4; ++c)
          if (std::abs(detail::cross2(p[b] - p[a], p[c] - p[a])) <= area_tol)
            return {Alphabet::d3_coplanar, ShapeFamily::nongeneric, 0};

    for (int j = 0; j < 4; ++j) {
      std::array<int, 3> others{};
      int k = 0;
      for (int a = 0; a < 4; ++a)
        if (a != j) others[k++] = a;
      if (detail::strictly_inside(p[j], p[others[0]], p[others[1]], p[others[2]]))
        return {Alphabet::d3_coplanar, ShapeFamily::interior, j + 1};
    }

    Eigen::Vector2d mid = Eigen::Vector2d::Zero();
    for (const auto& x : p) mid += x / 4.0;
    std::array<int, 4> cyc{0, 1, 2, 3};
    std::sort(cyc.begin(), cyc.end(), [&](int a, int b) {
      return std::atan2(p[a].y() - mid.y(), p[a].x() - mid.x()) < std::atan2(p[b].y() - mid.y(), p[b].x() - mid.x());
    });
    const auto pos1 = std::find(cyc.begin(), cyc.end(), 0) - cyc.begin();
    return {Alphabet::d3_coplanar, ShapeFamily::convex, cyc[(pos1 + 2) % 4] + 1};
  }

  return {Alphabet::none, ShapeFamily::nongeneric, 0};
}

namespace detail {

inline double det_at(const Trajectory& traj, const MassSystem& m, double t) {
  return reduce(dense_eval(traj, t).q, m).determinant();
}

inline double root_in(const Trajectory& traj, const MassSystem& m, double lo, double hi, double f_lo, double f_hi,
                      double& out_lo, double& out_hi) {
  auto f = [&](double t) { return det_at(traj, m, t); };
  auto tol = [](double a, double b) { return std::abs(b - a) <= kRootRelTimeTol * std::max(1.0, std::abs(a)); };
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  out_lo = bracket.first;
  out_hi = bracket.second;
  const double f1 = f(bracket.first), f2 = f(bracket.second);
  return std::abs(f1) <= std::abs(f2) ? bracket.first : bracket.second;
}

inline DegenerationEvent make_event(const Trajectory& traj, const MassSystem& m, double t, double lo, double hi,
                                    bool grazing) {
  const State s = dense_eval(traj, t);
  DegenerationEvent ev;
  ev.t_star = t;
  ev.t_lo = lo;
  ev.t_hi = hi;
  ev.residual = std::abs(reduce(s.q, m).determinant());
  ev.grazing = grazing;
  try {
    ev.symbol = classify_shape(s.q, m.dimension());
  } catch (const PreconditionError&) {
    ev.symbol = {m.dimension() == 2 ? Alphabet::d2_syzygy : m.dimension() == 3 ? Alphabet::d3_coplanar : Alphabet::none,
                 ShapeFamily::nongeneric, 0};
  }
  return ev;
}

inline int sign_of(double x) { return (x > 0) - (x < 0); }

}  // namespace detail

/// Every sign change of det(reduce(q(t))) between consecutive samples, refined
/// on the dense output, plus grazing approaches to the degeneration locus.
/// Events are returned in time order.
inline std::vector<DegenerationEvent> scan_degenerations(const Trajectory& traj, const MassSystem& m) {
  const auto& samples = traj.samples();
  if (samples.size() < 2) throw PreconditionError("scan_degenerations: need at least two samples");
  std::vector<double> det(samples.size()), absS(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Matrix r = reduce(samples[i].q, m);
    det[i] = r.determinant();
    absS[i] = std::abs(signed_distance(r));
  }

  std::vector<DegenerationEvent> events;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = samples[i].t;
    if (det[i] == 0.0) {
      events.push_back(detail::make_event(traj, m, t, t, t, false));
      continue;
    }
    if (i == 0) continue;
    const int s0 = detail::sign_of(det[i - 1]), s1 = detail::sign_of(det[i]);
    if (s0 != 0 && s0 != s1) {
      double lo, hi;
      const double root = detail::root_in(traj, m, samples[i - 1].t, t, det[i - 1], det[i], lo, hi);
      events.push_back(detail::make_event(traj, m, root, lo, hi, false));
    }
  }

  // Local minima of |S| with no sign change between samples.  The oriented
  // distance sign * S is minimised: a negative minimum deeper than the grazing
  // threshold means two crossings hidden between samples, a shallower one is
  // indistinguishable from a tangency.
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const int sl = detail::sign_of(det[i - 1]), sc = detail::sign_of(det[i]), sr = detail::sign_of(det[i + 1]);
    if (sc == 0 || sl != sc || sr != sc) continue;
    if (!(absS[i] <= absS[i - 1] && absS[i] <= absS[i + 1])) continue;
    const double lo = samples[i - 1].t, hi = samples[i + 1].t;
    auto oriented = [&](double t) { return sc * signed_distance(reduce(dense_eval(traj, t).q, m)); };
    const auto best = boost::math::tools::brent_find_minima(oriented, lo, hi, 52);
    const double t_min = best.first;
    const Matrix r_min = reduce(dense_eval(traj, t_min).q, m);
    const double threshold = kGrazingRelTol * r_min.norm();
    if (best.second <= -threshold) {
      const double d_min = r_min.determinant();
      double blo, bhi;
      const double r1 = detail::root_in(traj, m, lo, t_min, det[i - 1], d_min, blo, bhi);
      events.push_back(detail::make_event(traj, m, r1, blo, bhi, false));
      const double r2 = detail::root_in(traj, m, t_min, hi, d_min, det[i + 1], blo, bhi);
      events.push_back(detail::make_event(traj, m, r2, blo, bhi, false));
    } else if (best.second < threshold) {
      events.push_back(detail::make_event(traj, m, t_min, lo, hi, true));
    }
  }

  std::sort(events.begin(), events.end(),
            [](const DegenerationEvent& a, const DegenerationEvent& b) { return a.t_star < b.t_star; });
  return events;
}

/// Marker prepended to the symbol of a grazing event.
inline constexpr char kGrazingMarker = '~';

/// Symbols in time order; grazing events carry kGrazingMarker, nongeneric
/// shapes render as '?'.
inline std::string symbol_sequence(const std::vector<DegenerationEvent>& events) {
  std::string word;
  for (const auto& e : events) {
    if (e.grazing) word += kGrazingMarker;
    word += e.symbol.str();
  }
  return word;
}

}  // namespace coplanar
