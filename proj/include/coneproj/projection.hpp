#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "coneproj/detail/lp_fit.hpp"
#include "coneproj/sets.hpp"
#include "coneproj/space.hpp"

namespace coneproj {

/// Outcome of a metric projection P_C x. The residual is R x = x - P_C x,
/// so `point + residual` reproduces x up to one rounding per coordinate.
struct ProjectionResult {
  Vector point;
  Vector residual;
  double certificate_max = 0.0; // largest violation of the optimality conditions
  int iterations = 0;
  bool converged = true;
  double start_gap = 0.0; // disagreement between solver starts (cone solver only)
};

namespace detail {

inline ProjectionResult make_result(const Vector &x, Vector point) {
  ProjectionResult r;
  r.residual = x - point;
  r.point = std::move(point);
  return r;
}

} // namespace detail

/// Closed form P x = x - <a,x> J*(a); linear in x.
inline ProjectionResult project_hyperplane(const SpaceConfig &space, const Vector &x, const Hyperplane &h) {
  detail::require_size(space, x.size(), "project_hyperplane");
  const Vector dir = inverse_duality_map(space, h.normal());
  auto r = detail::make_result(x, x - pair(h.normal(), x) * dir);
  r.certificate_max = std::abs(pair(h.normal(), r.point));
  return r;
}

inline ProjectionResult project_halfspace(const SpaceConfig &space, const Vector &x, const HalfspaceCone &h) {
  detail::require_size(space, x.size(), "project_halfspace");
  if (pair(h.outward(), x) <= 0.0)
    return detail::make_result(x, x);
  return project_hyperplane(space, x, h.boundary());
}

/// Minimizes t -> |x - t v|_p. The derivative of 0.5 |x - t v|^2 is
/// -<J(x - t v), v>, nondecreasing in t; its root is bracketed and refined
/// with TOMS 748.
inline ProjectionResult project_line(const SpaceConfig &space, const Vector &x, const Vector &v,
                                     const Tolerances &tol = {}) {
  detail::require_size(space, x.size(), "project_line");
  detail::require_size(space, v.size(), "project_line");
  if (v.is_zero())
    fail(ErrorKind::invalid_input, "project_line: direction must be nonzero");

  auto slope = [&](double t) { return -pair(duality_map(space, x - t * v), v); };
  // |d/dt |x - t v|_p^p| = p |sum v_i |r_i|^{p-1} sign r_i|
  auto pth_power_slope = [&](double t) {
    const Eigen::VectorXd r = (x - t * v).coords();
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      s += v[static_cast<int>(i)] * std::copysign(std::pow(std::abs(r[i]), space.p - 1.0), r[i]);
    return space.p * std::abs(s);
  };

  ProjectionResult res;
  double tstar = 0.0;
  int iterations = 0;
  if (!x.is_zero()) {
    // Bracket around the Euclidean coefficient, expanding outward.
    const double t0 = x.coords().dot(v.coords()) / v.coords().squaredNorm();
    double width = std::max(1.0, std::abs(t0)) * norm(space, x) / norm(space, v) + 1.0;
    double lo = t0 - width, hi = t0 + width;
    double flo = slope(lo), fhi = slope(hi);
    while (flo > 0.0 && iterations < 200) {
      hi = lo;
      fhi = flo;
      width *= 2.0;
      lo -= width;
      flo = slope(lo);
      ++iterations;
    }
    while (fhi < 0.0 && iterations < 200) {
      lo = hi;
      flo = fhi;
      width *= 2.0;
      hi += width;
      fhi = slope(hi);
      ++iterations;
    }
    if (flo == 0.0) {
      tstar = lo;
    } else if (fhi == 0.0) {
      tstar = hi;
    } else {
      std::uintmax_t max_iter = 200;
      const auto [a, b] = boost::math::tools::toms748_solve(slope, lo, hi, flo, fhi,
                                                            boost::math::tools::eps_tolerance<double>(52), max_iter);
      iterations += static_cast<int>(max_iter);
      // Both ends are within an ulp-scale bracket; keep the smaller slope.
      tstar = std::abs(slope(a)) <= std::abs(slope(b)) ? a : b;
    }
  }
  res = detail::make_result(x, tstar * v);
  res.iterations = iterations;
  res.certificate_max = x.is_zero() ? 0.0 : pth_power_slope(tstar);
  // Absolute for unit-scale inputs, relative to the derivative's size otherwise.
  const double scale = std::max(1.0, space.p * std::pow(norm(space, x), space.p - 1.0) * norm(space, v));
  res.converged = res.certificate_max <= tol.line_certificate * scale;
  return res;
}

/// Metric projection onto a subspace: unconstrained minimization over the
/// basis coefficients. Certificate: max_i |<J(x - Px), b_i>|.
inline ProjectionResult project_subspace(const SpaceConfig &space, const Vector &x, const SubspaceSpec &v,
                                         const Tolerances &tol = {}) {
  detail::require_size(space, x.size(), "project_subspace");
  const auto basis = subspace_basis(space, v, tol.rank);
  if (basis.empty())
    return detail::make_result(x, Vector::zero(space.n));
  const Eigen::MatrixXd b = detail::stack(basis, space.n);
  // Start from the Euclidean projection coefficients.
  const Eigen::VectorXd c0 = b.colPivHouseholderQr().solve(x.coords());
  detail::FitOptions opt;
  opt.nonnegative = false;
  opt.tolerance = tol.solver;
  opt.max_iter = tol.max_iter;
  const auto fit = detail::fit_lp(b, x.coords(), space.p, c0, opt);
  auto res = detail::make_result(x, Vector(Eigen::VectorXd(b * fit.coef)));
  const Covector jr = duality_map(space, res.residual);
  double cert = 0.0;
  for (const auto &bi : basis)
    cert = std::max(cert, std::abs(pair(jr, bi)));
  res.certificate_max = cert;
  res.iterations = fit.iterations;
  res.converged = cert <= tol.subspace_certificate * std::max(1.0, norm(space, x));
  return res;
}

struct ConeProjectionOptions {
  bool audit = true; // rerun from the p = 2 solution and compare
};

/// Optimality certificate of u = Px for the cone K:
/// max( max_i <J(x-u), g_i>, |<J(x-u), u>| ).
inline double cone_certificate(const SpaceConfig &space, const ConeSpec &k, const Vector &x, const Vector &u) {
  const Covector jr(detail::lr_duality(detail::snap_residual((x - u).coords(), x.coords()), space.p));
  double cert = std::abs(pair(jr, u));
  for (const auto &g : k.generators)
    cert = std::max(cert, pair(jr, g));
  return cert;
}

/// Metric projection onto a finitely generated cone: minimizes
/// 0.5 |x - G t|_p^2 over t >= 0, starting from t = 0 and, when auditing,
/// once more from the Euclidean (p = 2) solution. Strict convexity makes the
/// projected point unique, so a gap between the two answers is a solver error.
inline ProjectionResult project_cone(const SpaceConfig &space, const Vector &x, const ConeSpec &k,
                                     const Tolerances &tol = {}, ConeProjectionOptions copt = {}) {
  detail::require_size(space, x.size(), "project_cone");
  k.validate(space, tol.rank);
  if (x.is_zero()) {
    auto res = detail::make_result(x, Vector::zero(space.n));
    return res;
  }
  const Eigen::MatrixXd g = k.matrix();
  detail::FitOptions opt;
  opt.tolerance = tol.solver;
  opt.max_iter = tol.max_iter;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.cols());

  auto primary = detail::fit_lp(g, x.coords(), space.p, zero, opt);
  int iterations = primary.iterations;
  double gap = 0.0;
  if (copt.audit) {
    detail::FitResult warm;
    if (space.p == 2.0) {
      warm = primary;
    } else {
      const auto euclid = detail::fit_lp(g, x.coords(), 2.0, zero, opt);
      warm = detail::fit_lp(g, x.coords(), space.p, euclid.coef, opt);
      iterations += euclid.iterations + warm.iterations;
    }
    gap = detail::lr_norm(warm.residual - primary.residual, space.p);
    if (warm.objective < primary.objective)
      primary = std::move(warm);
  }

  auto res = detail::make_result(x, Vector(Eigen::VectorXd(g * primary.coef)));
  res.iterations = iterations;
  res.start_gap = gap;
  res.certificate_max = cone_certificate(space, k, x, res.point);
  const double scale = std::max(1.0, norm(space, x));
  res.converged = res.certificate_max <= tol.certificate * scale && gap <= tol.uniqueness * scale;
  return res;
}

/// As `project_cone`, but throws when the solver did not certify.
inline ProjectionResult project_cone_checked(const SpaceConfig &space, const Vector &x, const ConeSpec &k,
                                             const Tolerances &tol = {}, ConeProjectionOptions copt = {}) {
  auto res = project_cone(space, x, k, tol, copt);
  if (!res.converged)
    fail(ErrorKind::solver_failure, "project_cone: not certified (certificate " +
                                        std::to_string(res.certificate_max) + ", start gap " +
                                        std::to_string(res.start_gap) + ")");
  return res;
}

/// R x = x - P_K x.
inline Vector retraction_R(const SpaceConfig &space, const Vector &x, const ConeSpec &k, const Tolerances &tol = {},
                           ConeProjectionOptions copt = {}) {
  return project_cone_checked(space, x, k, tol, copt).residual;
}

} // namespace coneproj
