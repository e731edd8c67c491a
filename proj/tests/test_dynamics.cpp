#include <gtest/gtest.h>

#include <cmath>

#include "coplanar/dynamics.hpp"
#include "coplanar/scenarios.hpp"
#include "test_support.hpp"

using namespace coplanar;
using coplanar::testing::Rng;

namespace {

// Circular binary (masses 1 and 0.5, separation 1) in the xy plane with two
// spectators of mass 1e-12 parked far away on the z axis.
struct Kepler {
  MassSystem m;
  State s0;
  double period;
};

Kepler circular_binary() {
  Vector masses(4);
  masses << 1.0, 0.5, 1e-12, 1e-12;
  MassSystem m(masses, 1.0);
  const double r = 1.0, mu = m.G() * (masses(0) + masses(1));
  const double speed = std::sqrt(mu / r);
  State s;
  s.q = Matrix::Zero(3, 4);
  s.v = Matrix::Zero(3, 4);
  s.q(0, 0) = -r * masses(1) / 1.5;
  s.q(0, 1) = r * masses(0) / 1.5;
  s.v(1, 0) = -speed * masses(1) / 1.5;
  s.v(1, 1) = speed * masses(0) / 1.5;
  s.q(2, 2) = 1e3;
  s.q(2, 3) = -1e3;
  return {m, s, 2.0 * M_PI * std::sqrt(r * r * r / mu)};
}

double relative_y(const Trajectory& tr, double t) {
  const State s = dense_eval(tr, t);
  return s.q(1, 1) - s.q(1, 0);
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi), fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

IntegratorConfig config(double t_end, double sample = 0.01) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.sample_interval = sample;
  return cfg;
}

}  // namespace

TEST(Integrate, KeplerPeriodWithSpectators) {
  const Kepler k = circular_binary();
  const Trajectory tr = integrate(k.s0, k.m, PairPotential::newtonian(), config(1.25 * k.period, 0.05));
  ASSERT_EQ(tr.termination(), Termination::completed);
  ASSERT_LT(relative_y(tr, 0.9 * k.period), 0.0);
  ASSERT_GT(relative_y(tr, 1.1 * k.period), 0.0);
  const double measured = bisect([&](double t) { return relative_y(tr, t); }, 0.9 * k.period, 1.1 * k.period);
  EXPECT_NEAR(measured, k.period, 1e-6 * k.period);
}

TEST(Integrate, FixedStepRk4AgreesWithAdaptive) {
  const Kepler k = circular_binary();
  IntegratorConfig rk = config(1.0, 0.1);
  rk.kind = IntegratorKind::rk4_fixed;
  rk.step = 1e-3;
  const Trajectory a = integrate(k.s0, k.m, PairPotential::newtonian(), config(1.0, 0.1));
  const Trajectory b = integrate(k.s0, k.m, PairPotential::newtonian(), rk);
  EXPECT_EQ(b.accepted_steps(), 1000u);
  EXPECT_LE((a.samples().back().q - b.samples().back().q).norm(), 1e-9);
  EXPECT_LE(b.conservation().max_rel_energy_drift, 1e-10);
}

TEST(Integrate, FigureEightClosesAfterOnePeriod) {
  const Scenario sc = make_scenario("figure_eight");
  const double period = *sc.period;
  const Trajectory tr = integrate(sc.initial, sc.masses, sc.potential, config(1.1 * period));
  const State back = dense_eval(tr, period);
  const double err = (back.q - sc.initial.q).norm() + (back.v - sc.initial.v).norm();
  EXPECT_LE(err, 1e-6);
  EXPECT_LE(tr.conservation().max_rel_energy_drift, 1e-8);
  EXPECT_LE(tr.conservation().max_j_norm, 1e-10);
}

TEST(Integrate, CollinearCollapseTripsTheGuard) {
  const MassSystem m(Vector::Ones(3));
  State s;
  s.q = Matrix::Zero(2, 3);
  s.q.row(0) << -1.0, 0.0, 1.0;
  s.v = Matrix::Zero(2, 3);
  const Trajectory tr = integrate(s, m, PairPotential::newtonian(), config(10.0));
  EXPECT_EQ(tr.termination(), Termination::collision_guard);
  EXPECT_LT(tr.t_end(), 10.0);
  EXPECT_NE(tr.termination_reason().find("collision"), std::string::npos);
  // Free fall of two unit masses onto a fixed unit mass from distance one,
  // effective central mass 1 + 1/4: collapse at pi/2 sqrt(1 / (2 * 1.25)).
  const double t_fall = M_PI / 2.0 * std::sqrt(1.0 / (2.0 * 1.25));
  EXPECT_NEAR(tr.t_end(), t_fall, 1e-3);
}

TEST(Integrate, StepLimitRaisesWithLastGoodState) {
  const Scenario sc = make_scenario("figure_eight");
  IntegratorConfig cfg = config(10.0);
  cfg.max_steps = 25;
  try {
    integrate(sc.initial, sc.masses, sc.potential, cfg);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.last_good_state().t, 0.0);
    EXPECT_TRUE(e.last_good_state().q.allFinite());
  }
}

TEST(Integrate, RejectsBadInput) {
  const Scenario sc = make_scenario("lagrange_rotating");
  IntegratorConfig cfg = config(-1.0);
  EXPECT_THROW(integrate(sc.initial, sc.masses, sc.potential, cfg), InputError);
  cfg = config(1.0);
  cfg.rel_tol = 0.0;
  EXPECT_THROW(integrate(sc.initial, sc.masses, sc.potential, cfg), InputError);
  cfg = config(1.0);
  cfg.collision_radius = 10.0;
  EXPECT_THROW(integrate(sc.initial, sc.masses, sc.potential, cfg), PreconditionError);
}

TEST(DenseEval, ExactAtNodesAndRangeChecked) {
  const Scenario sc = make_scenario("figure_eight");
  const Trajectory tr = integrate(sc.initial, sc.masses, sc.potential, config(1.0, 0.1));
  ASSERT_EQ(tr.samples().size(), 11u);
  for (const auto& s : tr.samples()) {
    const State e = dense_eval(tr, s.t);
    EXPECT_EQ(e.q, s.q);
    EXPECT_EQ(e.v, s.v);
  }
  EXPECT_THROW(dense_eval(tr, 1.0 + 1e-9), RangeError);
  EXPECT_THROW(dense_eval(tr, -1e-9), RangeError);
  EXPECT_DOUBLE_EQ(tr.samples()[3].t, 0.30000000000000004);
}

TEST(DenseEval, StepMidpointMatchesHalfStepReintegration) {
  const Kepler k = circular_binary();
  IntegratorConfig cfg = config(3.0, 0.5);
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-10;
  const Trajectory tr = integrate(k.s0, k.m, PairPotential::newtonian(), cfg);
  IntegratorConfig fine = cfg;
  fine.rel_tol = 1e-13;
  fine.abs_tol = 1e-15;
  for (std::size_t i : {3ul, tr.segments().size() / 2, tr.segments().size() - 2}) {
    const DenseSegment& seg = tr.segments()[i];
    const State start = dense_eval(tr, seg.t0);
    fine.t_end = seg.t0 + 0.5 * seg.h;
    fine.sample_interval = 0.5 * seg.h;
    const State ref = integrate(start, k.m, PairPotential::newtonian(), fine).samples().back();
    const State mid = dense_eval(tr, seg.t0 + 0.5 * seg.h);
    const double local_tol = cfg.abs_tol + cfg.rel_tol * start.q.cwiseAbs().maxCoeff();
    EXPECT_LE((mid.q - ref.q).cwiseAbs().maxCoeff(), 10.0 * local_tol) << "segment " << i;
  }
}

TEST(Integrate, TimeReversal) {
  const Scenario sc = make_scenario("figure_eight");
  IntegratorConfig cfg = config(2.0, 2.0);
  const State fwd = integrate(sc.initial, sc.masses, sc.potential, cfg).samples().back();
  State rev{0.0, fwd.q, -fwd.v};
  const State back = integrate(rev, sc.masses, sc.potential, cfg).samples().back();
  const double tol = cfg.rel_tol * 100.0;
  EXPECT_LE((back.q - sc.initial.q).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((-back.v - sc.initial.v).cwiseAbs().maxCoeff(), tol);
}

TEST(Integrate, MomentumAndZeroAngularMomentumConserved) {
  Scenario sc = make_scenario("perturbed_tetrahedron", 3);
  const Trajectory tr = integrate(sc.initial, sc.masses, sc.potential, config(5.0));
  // Angular momentum unit of the run: M c^2 / T with c the initial largest
  // distance and T = sqrt(c^3 / (G M)).
  const double c = tr.diagnostics().front().r_max, total = sc.masses.total_mass();
  const double j_unit = total * c * c / std::sqrt(c * c * c / (sc.masses.G() * total));
  EXPECT_LE(tr.conservation().max_j_norm, 1e-10 * j_unit);
  EXPECT_LE(tr.conservation().max_p_drift, 1e-12);

  // Uniform drift: linear momentum nonzero but still conserved.
  State drifting = sc.initial;
  drifting.v = drifting.v.colwise() + Eigen::Vector3d(0.1, -0.2, 0.05).eval();
  const Trajectory tr2 = integrate(drifting, sc.masses, sc.potential, config(5.0));
  EXPECT_GT(tr2.conservation().max_p_norm, 0.1);
  EXPECT_LE(tr2.conservation().max_p_drift, 1e-12);
}

TEST(Integrate, DiagnosticsAlignWithSamples) {
  const Scenario sc = make_scenario("lagrange_rotating");
  const Trajectory tr = integrate(sc.initial, sc.masses, sc.potential, config(*sc.period, 0.05));
  ASSERT_EQ(tr.samples().size(), tr.diagnostics().size());
  for (std::size_t i = 0; i < tr.samples().size(); ++i) {
    if (i > 0) EXPECT_GT(tr.samples()[i].t, tr.samples()[i - 1].t);
    const Matrix r = reduce(tr.samples()[i].q, sc.masses);
    EXPECT_DOUBLE_EQ(tr.diagnostics()[i].det, r.determinant());
    // Relative equilibrium: all mutual distances stay at one.
    EXPECT_NEAR(tr.diagnostics()[i].r_max, 1.0, 1e-8);
    EXPECT_NEAR(tr.diagnostics()[i].r_min, 1.0, 1e-8);
  }
}

TEST(FromSamples, RequiresIncreasingTimes) {
  const Scenario sc = make_scenario("lagrange_rotating");
  std::vector<State> states{sc.initial, sc.initial};
  EXPECT_THROW(Trajectory::from_samples(sc.masses, sc.potential, states), InputError);
  states[1].t = 0.1;
  const Trajectory tr = Trajectory::from_samples(sc.masses, sc.potential, states);
  EXPECT_EQ(tr.segments().size(), 1u);
}
