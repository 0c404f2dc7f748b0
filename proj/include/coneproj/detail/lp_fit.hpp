#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "coneproj/space.hpp"

namespace coneproj::detail {

struct FitOptions {
  bool nonnegative = true; // t >= 0 (cone) or t free (subspace)
  double tolerance = 1e-9; // on the projected gradient, scaled by max(1, |x|)
  int max_iter = 100000;
};

struct FitResult {
  Eigen::VectorXd coef;
  Eigen::VectorXd residual; // x - G coef
  double objective = 0.0;   // 0.5 |residual|_p^2
  double projected_gradient = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Zeroes residual coordinates that are indistinguishable from rounding error
/// of r = x - u. For p near 1 the duality map amplifies such entries
/// (|r_i|^{p-1}), so they must not drive optimality decisions.
inline Eigen::VectorXd snap_residual(const Eigen::VectorXd &r, const Eigen::VectorXd &x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  Eigen::VectorXd out = r;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double u = x[i] - r[i];
    if (std::abs(r[i]) <= 4.0 * eps * (std::abs(x[i]) + std::abs(u)))
      out[i] = 0.0;
  }
  return out;
}

/// 0.5 |r|_p^2; its gradient in r is J(r).
inline double half_sq_norm(const Eigen::VectorXd &r, double p) {
  const double nr = lr_norm(r, p);
  return 0.5 * nr * nr;
}

/// Hessian of 0.5 |r|_p^2 in r. It is homogeneous of degree 0, so it is
/// evaluated at u = r/|r|: (p-1) diag(|u_i|^{p-2}) + (2-p) J(u) J(u)^T.
/// Coordinates with |u_i| below `floor` are clamped (the diagonal blows up for
/// p < 2 and vanishes for p > 2 there).
inline Eigen::MatrixXd half_sq_norm_hessian(const Eigen::VectorXd &r, double p) {
  const Eigen::Index n = r.size();
  if (p == 2.0)
    return Eigen::MatrixXd::Identity(n, n);
  const double nr = lr_norm(r, p);
  if (nr == 0.0)
    return Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd u = r / nr;
  const Eigen::VectorXd ju = lr_duality(u, p);
  constexpr double floor = 1e-8;
  Eigen::MatrixXd h = (2.0 - p) * ju * ju.transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    h(i, i) += (p - 1.0) * std::pow(std::max(std::abs(u[i]), floor), p - 2.0);
  return h;
}

/// Minimizes 0.5 |x - G t|_p^2 over t (t >= 0 when `nonnegative`).
///
/// Projected gradient with Armijo backtracking along the projection arc. The
/// step direction on the free (non-binding) coordinates is scaled by the
/// Newton metric G_F^T H G_F, falling back to the raw gradient when that
/// direction fails the sufficient-decrease test.
inline FitResult fit_lp(const Eigen::MatrixXd &gens, const Eigen::VectorXd &x, double p, Eigen::VectorXd start,
                        const FitOptions &opt) {
  const Eigen::Index m = gens.cols();
  FitResult out;
  out.coef = std::move(start);
  if (opt.nonnegative)
    out.coef = out.coef.cwiseMax(0.0);

  constexpr double armijo = 1e-4;
  constexpr double shrink = 0.5;
  constexpr int max_backtracks = 60;
  const double scale = std::max(1.0, lr_norm(x, p));
  const double tol = opt.tolerance * scale;
  // Newton-scaled steps are cheap near the solution, so iterate well past the
  // convergence threshold; convergence itself is judged against `tol`.
  const double target = 1e-4 * tol;

  auto clip = [&](Eigen::VectorXd t) {
    if (opt.nonnegative)
      t = t.cwiseMax(0.0);
    return t;
  };

  auto projected_gradient = [&](const Eigen::VectorXd &t, const Eigen::VectorXd &res) {
    if (m == 0)
      return 0.0;
    const Eigen::VectorXd g = -gens.transpose() * lr_duality(snap_residual(res, x), p);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      if (!(opt.nonnegative && t[j] <= 0.0 && g[j] > 0.0))
        worst = std::max(worst, std::abs(g[j]));
    return worst;
  };

  Eigen::VectorXd r = x - gens * out.coef;
  double f = half_sq_norm(r, p);
  Eigen::VectorXd grad(m);
  Eigen::VectorXd pg(m);
  int it = 0;
  int stalled = 0;
  int polish = 0;
  double f_prev = f;
  // Size of the last accepted coefficient change; for p > 2 a tiny gradient
  // alone does not pin the coefficients down.
  double last_step = std::numeric_limits<double>::infinity();
  auto coef_scale = [&] { return std::max(1.0, m == 0 ? 0.0 : out.coef.cwiseAbs().maxCoeff()); };
  for (; it < opt.max_iter; ++it) {
    if (it > 0) {
      stalled = (f_prev - f <= 1e-13 * f) ? stalled + 1 : 0;
      f_prev = f;
      if (stalled >= 50)
        break; // no measurable progress left in floating point
    }
    grad = -gens.transpose() * lr_duality(snap_residual(r, x), p);
    for (Eigen::Index j = 0; j < m; ++j)
      pg[j] = (opt.nonnegative && out.coef[j] <= 0.0 && grad[j] > 0.0) ? 0.0 : grad[j];
    out.projected_gradient = m == 0 ? 0.0 : pg.cwiseAbs().maxCoeff();
    if (f == 0.0 || (out.projected_gradient <= target && last_step <= 1e-14 * coef_scale()))
      break;
    // Bounded polishing once the convergence threshold is met.
    if (out.projected_gradient <= tol && ++polish > 20)
      break;

    // Binding set: at the bound with the gradient pushing outward.
    const double eps = std::min(1e-12 * scale, (out.coef - clip(out.coef - grad)).norm());
    std::vector<Eigen::Index> free;
    std::vector<bool> binding(static_cast<std::size_t>(m), false);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (opt.nonnegative && out.coef[j] <= eps && grad[j] > 0.0)
        binding[static_cast<std::size_t>(j)] = true;
      else
        free.push_back(j);
    }

    Eigen::VectorXd dir = -grad;
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd gf(gens.rows(), nf);
      Eigen::VectorXd gradf(nf);
      for (Eigen::Index k = 0; k < nf; ++k) {
        gf.col(k) = gens.col(free[static_cast<std::size_t>(k)]);
        gradf[k] = grad[free[static_cast<std::size_t>(k)]];
      }
      Eigen::MatrixXd hf = gf.transpose() * half_sq_norm_hessian(r, p) * gf;
      // Relative damping: for p > 2 the curvature along vanishing residual
      // coordinates can be far below 1.
      const double damping =
          std::max(1e-12 * hf.diagonal().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
      hf.diagonal().array() += damping;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hf);
      if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd df = ldlt.solve(-gradf);
        if (df.allFinite() && df.dot(gradf) < 0.0) {
          dir.setZero();
          for (Eigen::Index k = 0; k < nf; ++k)
            dir[free[static_cast<std::size_t>(k)]] = df[k];
          for (Eigen::Index j = 0; j < m; ++j)
            if (binding[static_cast<std::size_t>(j)])
              dir[j] = -out.coef[j];
        }
      }
    }

    auto try_direction = [&](const Eigen::VectorXd &d, double step) {
      for (int k = 0; k < max_backtracks; ++k, step *= shrink) {
        Eigen::VectorXd cand = clip(out.coef + step * d);
        Eigen::VectorXd rc = x - gens * cand;
        const double fc = half_sq_norm(rc, p);
        // Near the solution the decrease drops below the rounding level of f;
        // there a step is accepted when it shrinks the projected gradient.
        const bool sufficient = fc <= f + armijo * grad.dot(cand - out.coef) && fc <= f;
        const bool below_rounding = std::abs(fc - f) <= 16.0 * std::numeric_limits<double>::epsilon() * f &&
                                    projected_gradient(cand, rc) < 0.5 * out.projected_gradient;
        if (sufficient || below_rounding) {
          last_step = m == 0 ? 0.0 : (cand - out.coef).cwiseAbs().maxCoeff();
          const bool moved = last_step > 0.0;
          out.coef = std::move(cand);
          r = std::move(rc);
          f = fc;
          return moved;
        }
      }
      return false;
    };

    // Exact line search along the Newton direction, within the feasible
    // segment. Newton overshoots the minimum along the ray for p < 2 and
    // undershoots it by up to a factor p - 1 for p > 2 when residual
    // coordinates vanish; the root of the directional slope fixes both.
    {
      const Eigen::VectorXd gd = gens * dir;
      auto slope = [&](double s) { return -gd.dot(lr_duality(r - s * gd, p)); };
      double s_max = std::numeric_limits<double>::infinity();
      if (opt.nonnegative)
        for (Eigen::Index j = 0; j < m; ++j)
          if (dir[j] < 0.0)
            s_max = std::min(s_max, -out.coef[j] / dir[j]);
      const double s0 = slope(0.0);
      if (s0 < 0.0 && s_max >= 1.0) {
        double lo = 0.0, hi = std::min(1.0, s_max), shi = slope(hi);
        while (shi < 0.0 && hi < s_max && hi < 1e16) {
          lo = hi;
          hi = std::min(2.0 * hi, s_max);
          shi = slope(hi);
        }
        double step = hi;
        if (shi > 0.0) {
          std::uintmax_t iters = 100;
          const auto [a, b] = boost::math::tools::toms748_solve(slope, lo, hi, slope(lo), shi,
                                                                boost::math::tools::eps_tolerance<double>(40), iters);
          step = 0.5 * (a + b);
        }
        Eigen::VectorXd cand = clip(out.coef + step * dir);
        if (step == s_max)
          for (Eigen::Index j = 0; j < m; ++j)
            if (dir[j] < 0.0 && -out.coef[j] / dir[j] == s_max)
              cand[j] = 0.0;
        Eigen::VectorXd rc = x - gens * cand;
        const double fc = half_sq_norm(rc, p);
        // f may not resolve the decrease; the slope root is trusted up to rounding.
        if (fc <= f * (1.0 + 8.0 * std::numeric_limits<double>::epsilon()) && cand != out.coef) {
          last_step = (cand - out.coef).cwiseAbs().maxCoeff();
          out.coef = std::move(cand);
          r = std::move(rc);
          f = std::min(f, fc);
          continue;
        }
      }
    }
    if (try_direction(dir, 1.0))
      continue;
    // Gradient fallback; initial step from the Newton metric's scale.
    const double gn2 = grad.squaredNorm();
    const Eigen::VectorXd hg = gens * grad;
    const double curv = hg.dot(half_sq_norm_hessian(r, p) * hg);
    const double step = curv > 0.0 ? gn2 / curv : 1.0;
    if (!try_direction(-grad, step))
      break; // no further decrease representable in floating point
  }
  out.projected_gradient = projected_gradient(out.coef, r);
  out.converged = out.projected_gradient <= tol || f == 0.0;
  out.iterations = it;
  out.residual = r;
  out.objective = f;
  return out;
}

} // namespace coneproj::detail
