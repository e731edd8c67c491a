#include <gtest/gtest.h>

#include <cmath>

#include "coplanar/potentials.hpp"
#include "test_support.hpp"

using namespace coplanar;
using coplanar::testing::Rng;

namespace {

Matrix regular_tetrahedron() {
  Matrix q(3, 4);
  const double s = 1.0 / (2.0 * std::sqrt(2.0));  // unit edge
  q << s, s, -s, -s,  //
      s, -s, s, -s,   //
      s, -s, -s, s;
  return q;
}

}  // namespace

TEST(PotentialValue, Examples) {
  // Two unit masses at distance one; the other two far away with tiny mass.
  Vector masses(4);
  masses << 1, 1, 1e-300, 1e-300;
  const MassSystem m(masses);
  Matrix q = Matrix::Zero(3, 4);
  q(0, 1) = 1.0;
  q(1, 2) = 1e6;
  q(2, 3) = 1e6;
  EXPECT_NEAR(potential_value(q, m, PairPotential::newtonian()), -1.0, 1e-15);

  const MassSystem unit(Vector::Ones(4));
  const Matrix tet = regular_tetrahedron();
  EXPECT_NEAR(potential_value(tet, unit, PairPotential::newtonian()), -6.0, 1e-14);
  EXPECT_NEAR(potential_value(tet, unit, PairPotential::power_law(2.0)), -6.0, 1e-14);

  Rng rng(1);
  const Matrix r = rng.uniform_matrix(3, 4);
  double expected = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) expected -= 1.0 / (r.col(a) - r.col(b)).squaredNorm();
  EXPECT_NEAR(potential_value(r, unit, PairPotential::power_law(2.0, 1.0)), expected, 1e-12 * std::abs(expected));
}

TEST(PotentialValue, CollisionIsAnError) {
  const MassSystem m(Vector::Ones(3));
  Matrix q = Matrix::Zero(2, 3);
  q(0, 2) = 1.0;
  EXPECT_THROW(potential_value(q, m, PairPotential::newtonian()), CollisionError);
  EXPECT_THROW(acceleration(q, m, PairPotential::newtonian()), CollisionError);
}

TEST(PotentialValue, RigidMotionInvariance) {
  Rng rng(2);
  const MassSystem m(rng.positive_masses(4));
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = rng.uniform_matrix(3, 4);
    const Matrix moved = (rng.rotation(3) * q).colwise() + Eigen::Vector3d(rng.uniform(), rng.uniform(), 0.3);
    for (const auto& p : {PairPotential::newtonian(), PairPotential::power_law(1.5, 2.0)}) {
      const double v0 = potential_value(q, m, p);
      EXPECT_NEAR(potential_value(moved, m, p), v0, 1e-13 * std::abs(v0));
    }
  }
}

TEST(Acceleration, TwoBodiesAndTetrahedron) {
  Vector masses(3);
  masses << 1, 1, 1e-300;
  const MassSystem m(masses);
  Matrix q = Matrix::Zero(2, 3);
  q(0, 0) = -0.5;
  q(0, 1) = 0.5;
  q(1, 2) = 1e8;
  const Matrix a = acceleration(q, m, PairPotential::newtonian());
  EXPECT_NEAR(a(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(a(0, 1), -1.0, 1e-15);
  EXPECT_NEAR(a(1, 0), 0.0, 1e-15);

  const MassSystem unit(Vector::Ones(4));
  const Matrix tet = regular_tetrahedron();
  const Matrix at = acceleration(tet, unit, PairPotential::newtonian());
  const double mag = at.col(0).norm();
  for (int b = 0; b < 4; ++b) {
    EXPECT_NEAR(at.col(b).norm(), mag, 1e-14);
    // Points at the centroid (the origin): antiparallel to the position.
    EXPECT_NEAR(at.col(b).normalized().dot(tet.col(b).normalized()), -1.0, 1e-14);
  }
}

TEST(Acceleration, IsTheMassMetricGradient) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const MassSystem m(rng.positive_masses(4), rng.uniform(0.5, 2.0));
    const Matrix q = rng.uniform_matrix(3, 4, -2.0, 2.0);
    for (const auto& p : {PairPotential::newtonian(), PairPotential::power_law(2.0, 0.7)}) {
      const Matrix a = acceleration(q, m, p);
      const double h = 1e-5 * q.norm();
      for (int col = 0; col < 4; ++col)
        for (int row = 0; row < 3; ++row) {
          Matrix qp = q, qm = q;
          qp(row, col) += h;
          qm(row, col) -= h;
          const double grad = (potential_value(qp, m, p) - potential_value(qm, m, p)) / (2 * h);
          const double fd = -grad / m.mass(col);
          EXPECT_NEAR(a(row, col), fd, 1e-6 * std::max(1.0, a.col(col).norm()));
        }
    }
  }
}

TEST(DeltaBound, NewtonianIsInverseCube) {
  for (double c : {0.5, 1.0, 2.0, 10.0})
    EXPECT_EQ(delta_bound(PairPotential::newtonian(), c, 4), 1.0 / (c * c * c));
  EXPECT_EQ(delta_bound(PairPotential::newtonian(), 2.0, 4), 0.125);
}

TEST(DeltaBound, PowerLaw) {
  EXPECT_DOUBLE_EQ(delta_bound(PairPotential::power_law(2.0, 1.0), 1.0, 4), 2.0);
  EXPECT_NEAR(delta_bound(PairPotential::power_law(3.0, 0.5), 2.0, 4), 3.0 * 0.5 / std::pow(2.0, 5), 1e-16);

  Matrix k = Matrix::Constant(3, 3, 2.0);
  k(0, 2) = 0.25;
  EXPECT_DOUBLE_EQ(delta_bound(PairPotential::power_law(1.0, k), 1.0, 3), 0.25);
}

TEST(DeltaBound, MonotoneInC) {
  double prev = std::numeric_limits<double>::infinity();
  for (double c = 0.1; c < 100.0; c *= 1.3) {
    const double d = delta_bound(PairPotential::newtonian(), c, 3);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(DeltaBound, CustomPotentialHypothesesAreChecked) {
  // Logarithmic potential: f = log r, f' = 1/r, f'' = -1/r^2, f'/r = 1/r^2 decreasing.
  const auto log_pot = PairPotential::custom([](double r) { return std::log(r); }, [](double r) { return 1.0 / r; },
                                             [](double r) { return -1.0 / (r * r); });
  EXPECT_DOUBLE_EQ(delta_bound(log_pot, 2.0, 3), 0.25);

  // Harmonic attraction f = r^2/2 is not concave.
  const auto spring = PairPotential::custom([](double r) { return 0.5 * r * r; }, [](double r) { return r; },
                                            [](double) { return 1.0; });
  EXPECT_THROW(delta_bound(spring, 1.0, 3), PotentialSpecError);
  EXPECT_THROW(check_attractive(spring, 1.0, 3), PotentialSpecError);
  EXPECT_NO_THROW(check_attractive(PairPotential::power_law(0.5), 3.0, 3));
}

TEST(OscillatorFrequency, Examples) {
  const MassSystem four(Vector::Ones(4));
  EXPECT_DOUBLE_EQ(oscillator_frequency(four, PairPotential::newtonian(), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(degeneration_window(four, PairPotential::newtonian(), 1.0), M_PI / 2);

  Vector one(2);
  one << 0.5, 0.5;
  const MassSystem unit_total(one);
  EXPECT_DOUBLE_EQ(oscillator_frequency(unit_total, PairPotential::newtonian(), 1.0), 1.0);
  EXPECT_DOUBLE_EQ(oscillator_frequency(unit_total, PairPotential::power_law(2.0), 1.0), std::sqrt(2.0));

  // Newtonian window pi sqrt(c^3 / GM) equals the general form with delta = 1/c^3.
  const MassSystem m(Vector::Constant(3, 1.7), 0.8);
  const double c = 2.3;
  EXPECT_NEAR(degeneration_window(m, PairPotential::newtonian(), c),
              M_PI * std::sqrt(c * c * c / (m.G() * m.total_mass())), 1e-14);
}

TEST(PowerLaw, RejectsBadParameters) {
  EXPECT_THROW(PairPotential::power_law(0.0), PotentialSpecError);
  EXPECT_THROW(PairPotential::power_law(1.0, -1.0), PotentialSpecError);
  EXPECT_THROW(PairPotential::custom(nullptr, nullptr, nullptr), PotentialSpecError);
}
