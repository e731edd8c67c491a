#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coplanar/dynamics.hpp"
#include "coplanar/events.hpp"
#include "coplanar/scenarios.hpp"
#include "test_support.hpp"

using namespace coplanar;
using coplanar::testing::Rng;

namespace {

Matrix points(std::initializer_list<std::initializer_list<double>> cols) {
  const auto n = static_cast<Eigen::Index>(cols.size());
  const auto d = static_cast<Eigen::Index>(cols.begin()->size());
  Matrix q(d, n);
  Eigen::Index a = 0;
  for (const auto& c : cols) {
    Eigen::Index i = 0;
    for (double x : c) q(i++, a) = x;
    ++a;
  }
  return q;
}

// Straight-line or quadratic path in reduced coordinates: r(t) = diag(2, 1, z(t)).
// Exact under cubic Hermite interpolation when z is at most quadratic.
Trajectory diagonal_path(const MassSystem& m, double z2, double z1, double z0, double t0, double t1, double dt) {
  std::vector<State> states;
  std::vector<Matrix> acc;
  const auto steps = static_cast<int>(std::lround((t1 - t0) / dt));
  for (int k = 0; k <= steps; ++k) {
    const double t = t0 + k * dt;
    Matrix r = Matrix::Zero(3, 3), dr = Matrix::Zero(3, 3), ddr = Matrix::Zero(3, 3);
    r(0, 0) = 2.0;
    r(1, 1) = 1.0;
    r(2, 2) = z2 * t * t + z1 * t + z0;
    dr(2, 2) = 2 * z2 * t + z1;
    ddr(2, 2) = 2 * z2;
    states.push_back({t, embed(r, m), embed(dr, m)});
    acc.push_back(embed(ddr, m));
  }
  return Trajectory::from_samples(m, PairPotential::newtonian(), states, acc);
}

Trajectory eight(double t_end, double sample = 0.01) {
  const Scenario sc = make_scenario("figure_eight");
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.sample_interval = sample;
  return integrate(sc.initial, sc.masses, sc.potential, cfg);
}

}  // namespace

TEST(ClassifyShape, UnitSquareIsConvexOppositeBodyOne) {
  const Matrix q = points({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
  const ShapeSymbol s = classify_shape(q, 3);
  EXPECT_EQ(s.alphabet, Alphabet::d3_coplanar);
  EXPECT_EQ(s.str(), "X3");
  // Swapping bodies 2 and 3 puts body 2 opposite body 1.
  EXPECT_EQ(classify_shape(points({{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}}), 3).str(), "X2");
}

TEST(ClassifyShape, CentroidIsInterior) {
  const Matrix q = points({{0, 0, 0}, {3, 0, 0}, {0, 3, 0}, {1, 1, 0}});
  EXPECT_EQ(classify_shape(q, 3).str(), "I4");
  const Matrix q2 = points({{1, 1, 0}, {3, 0, 0}, {0, 3, 0}, {0, 0, 0}});
  EXPECT_EQ(classify_shape(q2, 3).str(), "I1");
}

TEST(ClassifyShape, SyzygyNamesTheMiddleMass) {
  EXPECT_EQ(classify_shape(points({{2, 0}, {1, 0}, {3, 0}}), 2).str(), "1");
  EXPECT_EQ(classify_shape(points({{0, 5}, {0, -1}, {0, 2}}), 2).str(), "3");
  const ShapeSymbol s = classify_shape(points({{1, 1}, {0, 0}, {2, 2}}), 2);
  EXPECT_EQ(s.alphabet, Alphabet::d2_syzygy);
  EXPECT_EQ(s.family, ShapeFamily::middle);
  EXPECT_EQ(s.label, 1);
}

TEST(ClassifyShape, CollinearTriplesAreNongeneric) {
  const ShapeSymbol s = classify_shape(points({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}}), 3);
  EXPECT_FALSE(s.generic());
  EXPECT_EQ(s.str(), "?");
  // Binary collision on the syzygy line.
  EXPECT_FALSE(classify_shape(points({{0, 0}, {0, 0}, {1, 0}}), 2).generic());
}

TEST(ClassifyShape, RejectsNonDegenerateAndMalformedInput) {
  EXPECT_THROW(classify_shape(points({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), 3), PreconditionError);
  EXPECT_THROW(classify_shape(points({{0, 0}, {1, 0}, {0, 1}}), 2), PreconditionError);
  EXPECT_THROW(classify_shape(points({{0, 0}, {1, 0}}), 2), InputError);
  Matrix bad = points({{0, 0}, {1, 0}, {2, 0}});
  bad(0, 0) = std::nan("");
  EXPECT_THROW(classify_shape(bad, 2), InputError);
}

TEST(ClassifyShape, InvariantUnderSimilarities) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix q = Matrix::Zero(3, 4);
    q.topRows(2) = rng.uniform_matrix(2, 4);
    const ShapeSymbol base = classify_shape(q, 3);
    const Matrix rot = rng.rotation(3);
    const double scale = std::exp(rng.uniform(-3.0, 3.0));
    const Vector shift = rng.uniform_matrix(3, 1, -10.0, 10.0);
    const Matrix moved = ((scale * rot * q).colwise() + shift).eval();
    EXPECT_EQ(classify_shape(moved, 3), base) << "trial " << trial;
    // Reflections preserve the hull structure as well.
    Matrix mirrored = q;
    mirrored.row(0) *= -1.0;
    EXPECT_EQ(classify_shape(mirrored, 3), base) << "trial " << trial;
  }
}

TEST(ShapeSymbol, ParseRoundTrip) {
  for (const char* s : {"X1", "X4", "I2", "?"}) EXPECT_EQ(parse_symbol(s, 3).str(), s);
  for (const char* s : {"1", "2", "3"}) EXPECT_EQ(parse_symbol(s, 2).str(), s);
  EXPECT_THROW(parse_symbol("Y2", 3), InputError);
  EXPECT_THROW(parse_symbol("X", 3), InputError);
  EXPECT_THROW(parse_symbol("12", 2), InputError);
}

TEST(ScanDegenerations, StraightCrossingFoundAtItsRoot) {
  const MassSystem m(Vector::Ones(4));
  const Trajectory tr = diagonal_path(m, 0.0, 1.0, -0.0123, -1.0, 1.0, 0.1);
  const auto events = scan_degenerations(tr, m);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_NEAR(events[0].t_star, 0.0123, 1e-12);
  EXPECT_FALSE(events[0].grazing);
  EXPECT_LE(events[0].t_lo, events[0].t_star);
  EXPECT_GE(events[0].t_hi, events[0].t_star);
  EXPECT_LE(events[0].residual, 1e-11);
  EXPECT_EQ(events[0].symbol.alphabet, Alphabet::d3_coplanar);
}

TEST(ScanDegenerations, TangencyIsReportedAsGrazing) {
  const MassSystem m(Vector::Ones(4));
  // z = (t - 0.05)^2 touches zero between the samples at 0 and 0.1.
  const Trajectory tr = diagonal_path(m, 1.0, -0.1, 0.0025, -1.0, 1.0, 0.1);
  const auto events = scan_degenerations(tr, m);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_TRUE(events[0].grazing);
  EXPECT_NEAR(events[0].t_star, 0.05, 1e-6);
  EXPECT_EQ(symbol_sequence(events).front(), kGrazingMarker);
}

TEST(ScanDegenerations, TwoCrossingsBetweenSamples) {
  const MassSystem m(Vector::Ones(4));
  // Roots at 0.04 and 0.06, both strictly inside one sample interval.
  const Trajectory tr = diagonal_path(m, 1.0, -0.1, 0.0024, -1.0, 1.0, 0.1);
  const auto events = scan_degenerations(tr, m);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_NEAR(events[0].t_star, 0.04, 1e-12);
  EXPECT_NEAR(events[1].t_star, 0.06, 1e-12);
  EXPECT_FALSE(events[0].grazing || events[1].grazing);
}

TEST(ScanDegenerations, FigureEightWordIsPeriodic) {
  const Scenario sc = make_scenario("figure_eight");
  const double period = *sc.period;
  const auto one = scan_degenerations(eight(period), sc.masses);
  const auto two = scan_degenerations(eight(2 * period), sc.masses);
  const std::string w1 = symbol_sequence(one), w2 = symbol_sequence(two);
  EXPECT_EQ(w1.size(), 6u);
  EXPECT_EQ(w2, w1 + w1);
  EXPECT_EQ(std::set<char>(w1.begin(), w1.end()), (std::set<char>{'1', '2', '3'}));
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_NEAR(two[i + one.size()].t_star, one[i].t_star + period, 1e-7);
  // Consecutive syzygies never repeat a letter on this orbit.
  for (std::size_t i = 1; i < w2.size(); ++i) EXPECT_NE(w2[i], w2[i - 1]);
}

TEST(ScanDegenerations, IndependentOfSampleSpacing) {
  const Scenario sc = make_scenario("figure_eight");
  const auto coarse = scan_degenerations(eight(2 * *sc.period, 0.01), sc.masses);
  const auto fine = scan_degenerations(eight(2 * *sc.period, 0.005), sc.masses);
  ASSERT_EQ(coarse.size(), fine.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    EXPECT_NEAR(coarse[i].t_star, fine[i].t_star, 1e-9);
    EXPECT_EQ(coarse[i].symbol, fine[i].symbol);
  }
}

TEST(ScanDegenerations, RelabelingPermutesTheWord) {
  const Scenario sc = make_scenario("figure_eight");
  IntegratorConfig cfg;
  cfg.t_end = *sc.period;
  // Body a of the original run becomes body (a + 1) mod 3.
  State shifted = sc.initial;
  for (int a = 0; a < 3; ++a) {
    shifted.q.col((a + 1) % 3) = sc.initial.q.col(a);
    shifted.v.col((a + 1) % 3) = sc.initial.v.col(a);
  }
  const auto base = scan_degenerations(integrate(sc.initial, sc.masses, sc.potential, cfg), sc.masses);
  const auto moved = scan_degenerations(integrate(shifted, sc.masses, sc.potential, cfg), sc.masses);
  ASSERT_EQ(base.size(), moved.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_NEAR(base[i].t_star, moved[i].t_star, 1e-8);
    EXPECT_EQ(moved[i].symbol.label, base[i].symbol.label % 3 + 1);
  }
}

TEST(ScanDegenerations, NeedsTwoSamples) {
  const MassSystem m(Vector::Ones(4));
  const Trajectory tr = diagonal_path(m, 0.0, 1.0, 0.5, 0.0, 0.1, 0.1);
  EXPECT_NO_THROW(scan_degenerations(tr, m));
  EXPECT_TRUE(symbol_sequence({}).empty());
}
