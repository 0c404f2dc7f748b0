#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "coneproj/projection.hpp"
#include "coneproj/rng.hpp"

using namespace coneproj;

namespace {

double max_abs_diff(const Vector &a, const Vector &b) { return (a - b).coords().cwiseAbs().maxCoeff(); }

} // namespace

TEST(ProjectLine, DiagonalInL3) {
  // t* = sqrt(2) - 1 for e1 and 2 - sqrt(2) for e1 + e2.
  const auto s = SpaceConfig::make(3, 3.0);
  const Vector ones{1, 1, 1};
  const auto a = project_line(s, Vector{1, 0, 0}, ones);
  EXPECT_TRUE(a.converged);
  EXPECT_NEAR(a.point[0], std::sqrt(2.0) - 1.0, 1e-14);
  const auto b = project_line(s, Vector{1, 1, 0}, ones);
  EXPECT_NEAR(b.point[2], 2.0 - std::sqrt(2.0), 1e-14);
  // The additivity defect that makes span{(1,1,1)} a nonlinear counterexample.
  EXPECT_NEAR(norm(s, b.point - 2.0 * a.point), 0.34994842673688332, 1e-12);
}

TEST(ProjectLine, SymmetricCaseInL5) {
  const auto s = SpaceConfig::make(3, 5.0);
  const auto r = project_line(s, Vector{1, 2, -1}, Vector{1, -1, 2});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.point[0], -0.5, 1e-13);
  EXPECT_NEAR(r.point[2], -1.0, 1e-13);
}

TEST(ProjectLine, ZeroDirectionRejected) {
  const auto s = SpaceConfig::make(2, 3.0);
  EXPECT_THROW(project_line(s, Vector{1, 0}, Vector{0, 0}), Error);
}

TEST(ProjectHyperplane, ClosedFormReference) {
  const auto s = SpaceConfig::make(3, 3.0);
  const auto r = project_hyperplane(s, Vector{1, 0, 0}, Hyperplane(s, Covector{1, 2, 0}));
  EXPECT_NEAR(r.point[0], 0.73879612503625856, 1e-14);
  EXPECT_NEAR(r.point[1], -0.36939806251812928, 1e-14);
  EXPECT_EQ(r.point[2], 0.0);
  EXPECT_LE(r.certificate_max, 1e-15);
}

TEST(ProjectHyperplane, MatchesSubspaceSolver) {
  CounterRng rng(5);
  for (double p : {1.5, 3.0, 5.0}) {
    const auto s = SpaceConfig::make(4, p);
    for (int t = 0; t < 50; ++t) {
      const Covector a(rng.gaussian(4));
      const Vector x(rng.gaussian(4));
      const auto closed = project_hyperplane(s, x, Hyperplane(s, a));
      const auto iter = project_subspace(s, x, SubspaceSpec::kernel_of({a}));
      EXPECT_TRUE(iter.converged);
      EXPECT_LE(norm(s, closed.point - iter.point), 1e-7 * (1.0 + norm(s, x))) << "p=" << p;
    }
  }
}

TEST(ProjectHalfspace, InsidePointIsFixed) {
  const auto s = SpaceConfig::make(3, 3.0);
  const HalfspaceCone h(s, Covector{1, 2, 0});
  const Vector inside{-1, 0, 4};
  EXPECT_EQ(project_halfspace(s, inside, h).point, inside);
  const auto out = project_halfspace(s, Vector{1, 0, 0}, h);
  EXPECT_NEAR(out.point[0], 0.73879612503625856, 1e-14);
}

TEST(ProjectSubspace, DiagonalFromSolver) {
  const auto s = SpaceConfig::make(3, 3.0);
  const auto r = project_subspace(s, Vector{1, 1, 0}, SubspaceSpec::from_basis({Vector{1, 1, 1}}));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.point[0], 0.58578643762690495, 1e-10);
}

TEST(ProjectSubspace, PointInsideIsFixed) {
  const auto s = SpaceConfig::make(4, 1.5);
  const auto v = SubspaceSpec::from_basis({Vector{1, 0, 2, 0}, Vector{0, 1, 0, -1}});
  const Vector x{2, -1, 4, 1};
  const auto r = project_subspace(s, x, v);
  EXPECT_LE(max_abs_diff(r.point, x), 1e-12);
}

TEST(ProjectCone, ReferenceValues) {
  // Independent active-set enumeration (tests/oracle/lp_oracles.py).
  const ConeSpec k{{Vector{1, 0, 0}, Vector{1, 2, 0}, Vector{0, 1, 3}}, std::nullopt};
  struct Case {
    double p;
    Vector x, expected;
  };
  const Case cases[] = {
      {1.5, Vector{0.3, -0.8, 1.1}, Vector{0.3, 0.325, 0.975}},
      {1.5, Vector{-1, 0.4, 0.9}, Vector{0.0, 0.30357142857142857, 0.91071428571428571}},
      {3.0, Vector{0.3, -0.8, 1.1}, Vector{0.3, 0.1783777759041896, 0.53513332771256879}},
      {3.0, Vector{-1, 0.4, 0.9}, Vector{0.0, 0.31613904777964089, 0.94841714333892268}},
  };
  for (const auto &c : cases) {
    const auto s = SpaceConfig::make(3, c.p);
    const auto r = project_cone(s, c.x, k);
    EXPECT_TRUE(r.converged) << "p=" << c.p;
    EXPECT_LE(max_abs_diff(r.point, c.expected), 1e-7) << "p=" << c.p;
  }
}

TEST(ProjectCone, SingleRayInL3) {
  const auto s = SpaceConfig::make(3, 3.0);
  const ConeSpec k{{Vector{1, 1, 1}}, std::nullopt};
  const auto r = project_cone(s, Vector{1, 0, 0}, k);
  EXPECT_TRUE(r.converged);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(r.point[i], std::sqrt(2.0) - 1.0, 1e-9);
  EXPECT_LE(max_abs_diff(project_cone(s, Vector{-1, -1, 0}, k).point, Vector::zero(3)), 1e-12);
}

TEST(ProjectCone, Idempotent) {
  const ConeSpec k{{Vector{1, 0, 0}, Vector{1, 2, 0}, Vector{0, 1, 3}}, std::nullopt};
  for (double p : {1.5, 2.0, 3.0, 7.0}) {
    const auto s = SpaceConfig::make(3, p);
    CounterRng rng(11);
    for (int t = 0; t < 20; ++t) {
      Vector x = Vector::zero(3);
      for (int i = 0; i < 3; ++i)
        x[i] = rng.normal();
      const Vector px = project_cone(s, x, k).point;
      EXPECT_LE(max_abs_diff(project_cone(s, px, k).point, px), 1e-7) << "p=" << p;
      const Hyperplane h(s, Covector{1, 2, -1});
      const Vector hx = project_hyperplane(s, x, h).point;
      EXPECT_LE(max_abs_diff(project_hyperplane(s, hx, h).point, hx), 1e-7);
      const Vector lx = project_line(s, x, Vector{1, -1, 2}).point;
      EXPECT_LE(max_abs_diff(project_line(s, lx, Vector{1, -1, 2}).point, lx), 1e-7);
    }
  }
}

TEST(ProjectCone, OrthantIsPositivePart) {
  for (double p : {1.5, 2.0, 3.0, 7.0}) {
    const auto s = SpaceConfig::make(3, p);
    const auto r = project_cone(s, Vector{1, -1, 0.5}, orthant(s));
    EXPECT_TRUE(r.converged);
    EXPECT_LE(max_abs_diff(r.point, Vector{1, 0, 0.5}), 1e-9) << "p=" << p;
  }
}

TEST(ProjectCone, DecompositionIsExact) {
  const auto s = SpaceConfig::make(3, 3.0);
  const ConeSpec k{{Vector{1, 0, 0}, Vector{1, 2, 0}, Vector{0, 1, 3}}, std::nullopt};
  CounterRng rng(17);
  for (int t = 0; t < 100; ++t) {
    const Vector x(rng.gaussian(3));
    const auto r = project_cone(s, x, k);
    const double ulp = std::numeric_limits<double>::epsilon() * x.coords().cwiseAbs().maxCoeff();
    EXPECT_LE(max_abs_diff(r.point + r.residual, x), 2.0 * ulp);
  }
}

TEST(ProjectCone, ZeroAndMembers) {
  const auto s = SpaceConfig::make(3, 1.5);
  const ConeSpec k{{Vector{1, 0, 0}, Vector{1, 2, 0}, Vector{0, 1, 3}}, std::nullopt};
  EXPECT_TRUE(project_cone(s, Vector::zero(3), k).point.is_zero());
  const Vector inside = 0.5 * k.generators[0] + 2.0 * k.generators[2];
  EXPECT_LE(max_abs_diff(project_cone(s, inside, k).point, inside), 1e-9);
}

TEST(ProjectCone, RandomCertificates) {
  CounterRng rng(23);
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const auto s = SpaceConfig::make(3, p);
    for (int c = 0; c < 20; ++c) {
      ConeSpec k;
      for (int i = 0; i < 3; ++i)
        k.generators.emplace_back(rng.gaussian(3));
      for (int t = 0; t < 20; ++t) {
        const Vector x(rng.gaussian(3));
        const auto r = project_cone(s, x, k);
        EXPECT_TRUE(r.converged) << "p=" << p;
        EXPECT_LE(r.certificate_max, 1e-7 * std::max(1.0, norm(s, x)));
        EXPECT_LE(r.start_gap, 1e-6);
      }
    }
  }
}

TEST(ProjectCone, NearestAmongSamples) {
  // Brute force: no sampled cone point is closer than P x.
  const auto s = SpaceConfig::make(3, 3.0);
  const ConeSpec k{{Vector{1, 0, 0}, Vector{1, 2, 0}, Vector{0, 1, 3}}, std::nullopt};
  const Vector x{0.3, -0.8, 1.1};
  const double best = norm(s, project_cone(s, x, k).residual);
  CounterRng rng(29);
  for (int t = 0; t < 20000; ++t) {
    const Vector u = rng.uniform(0, 1) * k.generators[0] + rng.uniform(0, 1) * k.generators[1] +
                     rng.uniform(0, 1) * k.generators[2];
    EXPECT_GE(norm(s, x - u), best - 1e-12);
  }
}

TEST(ProjectCone, CheckedThrowsOnDimensionMismatch) {
  const auto s = SpaceConfig::make(3, 3.0);
  EXPECT_THROW(project_cone_checked(s, Vector{1, 2}, orthant(s)), Error);
}

TEST(Retraction, ResidualIsRx) {
  const auto s = SpaceConfig::make(3, 3.0);
  const auto k = orthant(s);
  const Vector rx = retraction_R(s, Vector{1, -1, 0.5}, k);
  EXPECT_LE(max_abs_diff(rx, Vector{0, -1, 0}), 1e-9);
}
