#include <cmath>

#include <gtest/gtest.h>

#include "coneproj/rng.hpp"
#include "coneproj/space.hpp"

using namespace coneproj;

namespace {

// Reference values from tests/oracle/lp_oracles.py (mpmath, 40 digits).
constexpr double cbrt2 = 1.2599210498948732;      // |(1,1,0)|_3 = 2^{1/3}
constexpr double two_two_thirds = 1.5874010519681995; // |(1,1)|_{3/2} = 2^{2/3}
constexpr double norm5_1m23 = 3.0773848853940628;  // |(1,-2,3)|_5

} // namespace

TEST(SpaceConfig, DualExponent) {
  EXPECT_DOUBLE_EQ(SpaceConfig::make(3, 3.0).q, 1.5);
  EXPECT_DOUBLE_EQ(SpaceConfig::make(3, 1.5).q, 3.0);
  EXPECT_DOUBLE_EQ(SpaceConfig::make(2, 2.0).q, 2.0);
  EXPECT_TRUE(SpaceConfig::make(2, 2.0).hilbert());
  EXPECT_DOUBLE_EQ(SpaceConfig::make(4, 5.0).dual().p, 1.25);
}

TEST(SpaceConfig, RejectsOutOfRange) {
  EXPECT_THROW(SpaceConfig::make(3, 1.0), Error);
  EXPECT_THROW(SpaceConfig::make(3, 1.04), Error);
  EXPECT_THROW(SpaceConfig::make(3, 20.5), Error);
  EXPECT_THROW(SpaceConfig::make(0, 2.0), Error);
  EXPECT_THROW(SpaceConfig::make(3, std::nan("")), Error);
  try {
    SpaceConfig::make(3, 0.5);
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(Norm, ReferenceValues) {
  EXPECT_NEAR(norm(SpaceConfig::make(3, 3.0), Vector{1, 1, 0}), cbrt2, 1e-15);
  EXPECT_NEAR(norm(SpaceConfig::make(2, 1.5), Vector{1, 1}), two_two_thirds, 1e-15);
  EXPECT_NEAR(norm(SpaceConfig::make(3, 5.0), Vector{1, -2, 3}), norm5_1m23, 1e-14);
  EXPECT_NEAR(dual_norm(SpaceConfig::make(3, 3.0), Covector{1, 1, 0}), two_two_thirds, 1e-15);
  EXPECT_EQ(norm(SpaceConfig::make(3, 3.0), Vector::zero(3)), 0.0);
}

TEST(Norm, ScalesWithoutOverflow) {
  const auto s = SpaceConfig::make(3, 20.0);
  EXPECT_NEAR(norm(s, Vector{1e300, 1e300, 0}) / 1e300, std::pow(2.0, 1.0 / 20.0), 1e-14);
  EXPECT_NEAR(norm(s, Vector{1e-300, 1e-300, 0}) / 1e-300, std::pow(2.0, 1.0 / 20.0), 1e-14);
}

TEST(DualityMap, ReferenceValues) {
  const auto s3 = SpaceConfig::make(3, 3.0);
  const Covector j = duality_map(s3, Vector{1, 1, 0});
  const double c = std::pow(2.0, -1.0 / 3.0);
  EXPECT_NEAR(j[0], c, 1e-15);
  EXPECT_NEAR(j[1], c, 1e-15);
  EXPECT_EQ(j[2], 0.0);

  const auto s15 = SpaceConfig::make(3, 1.5);
  const Covector k = duality_map(s15, Vector{3, -1, 2});
  EXPECT_NEAR(k[0], 3.6060877161185124, 1e-14);
  EXPECT_NEAR(k[1], -2.0819757136224259, 1e-14);
  EXPECT_NEAR(k[2], 2.9443582907362377, 1e-14);
}

TEST(DualityMap, InverseOfSumIsSqrtTwoShaped) {
  // J* on l_{3/2}: (1,2,1) -> proportional to (1, sqrt 2, 1).
  const auto s = SpaceConfig::make(3, 3.0);
  const Vector y = inverse_duality_map(s, Covector{1, 2, 1});
  EXPECT_NEAR(y[0], 1.6901888290514402, 1e-14);
  EXPECT_NEAR(y[1], 2.3902879650160474, 1e-14);
  EXPECT_NEAR(y[1] / y[0], std::sqrt(2.0), 1e-14);
}

TEST(DualityMap, ZeroMapsToZero) {
  const auto s = SpaceConfig::make(4, 1.5);
  EXPECT_TRUE(duality_map(s, Vector::zero(4)).is_zero());
  EXPECT_TRUE(inverse_duality_map(s, Covector::zero(4)).is_zero());
}

TEST(DualityMap, IdentityForHilbert) {
  const auto s = SpaceConfig::make(3, 2.0);
  const Vector x{0.3, -2.0, 5.0};
  EXPECT_EQ(duality_map(s, x).coords(), x.coords());
}

TEST(DualityMap, RandomIdentities) {
  CounterRng rng(11);
  for (double p : {1.1, 1.5, 2.0, 3.0, 5.0, 12.0}) {
    for (int n : {1, 2, 5}) {
      const auto s = SpaceConfig::make(n, p);
      for (int t = 0; t < 200; ++t) {
        const Vector x(rng.gaussian(n) * std::exp(rng.uniform(-5.0, 5.0)));
        const Covector jx = duality_map(s, x);
        const double nx = norm(s, x);
        EXPECT_NEAR(pair(jx, x), nx * nx, 1e-12 * nx * nx);
        EXPECT_NEAR(dual_norm(s, jx), nx, 1e-12 * nx);
        const Vector back = inverse_duality_map(s, jx);
        EXPECT_LE(norm(s, back - x), 1e-10 * nx) << "p=" << p << " n=" << n;
      }
    }
  }
}

TEST(DualityMap, Homogeneous) {
  const auto s = SpaceConfig::make(3, 3.0);
  const Vector x{0.2, -1.0, 0.7};
  const Covector a = duality_map(s, -2.5 * x);
  const Covector b = -2.5 * duality_map(s, x);
  EXPECT_LE((a - b).coords().cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DualityMap, DimensionMismatchThrows) {
  const auto s = SpaceConfig::make(3, 3.0);
  EXPECT_THROW(duality_map(s, Vector{1, 2}), Error);
  EXPECT_THROW(norm(s, Vector{1, 2, 3, 4}), Error);
}

TEST(Parallelogram, DefectReference) {
  const auto s = SpaceConfig::make(3, 3.0);
  EXPECT_NEAR(parallelogram_defect(s, Vector::unit(3, 0), Vector::unit(3, 1)), -0.82519789606360105, 1e-14);
  const auto s2 = SpaceConfig::make(2, 3.0);
  EXPECT_NEAR(parallelogram_defect(s2, Vector::unit(2, 0), Vector::unit(2, 1)), -0.82519789606360105, 1e-14);
  const auto h = SpaceConfig::make(3, 2.0);
  EXPECT_NEAR(parallelogram_defect(h, Vector{1, 2, 3}, Vector{-4, 0.5, 2}), 0.0, 1e-12);
}

TEST(Normalized, UnitNorm) {
  const auto s = SpaceConfig::make(3, 5.0);
  EXPECT_NEAR(norm(s, normalized(s, Vector{3, -1, 4})), 1.0, 1e-15);
  EXPECT_NEAR(dual_norm(s, normalized(s, Covector{3, -1, 4})), 1.0, 1e-15);
  EXPECT_TRUE(normalized(s, Vector::zero(3)).is_zero());
}

TEST(CounterRng, Reproducible) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(a.next_u64(), b.next_u64());
  CounterRng c(42);
  EXPECT_NE(c.split(1).next_u64(), c.split(2).next_u64());
  // Splitting does not consume draws from the parent.
  CounterRng d(42);
  (void)d.split(7);
  CounterRng e(42);
  EXPECT_EQ(d.next_u64(), e.next_u64());
}

TEST(CounterRng, Moments) {
  CounterRng r(3);
  double sum = 0.0, sq = 0.0;
  constexpr int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / count, 0.0, 0.01);
  EXPECT_NEAR(sq / count, 1.0, 0.02);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
