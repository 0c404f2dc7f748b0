#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "coneproj/detail/lp_fit.hpp"
#include "coneproj/space.hpp"

namespace coneproj {

/// H(a) = {x : <a,x> = 0} with a dual-unit normal.
class Hyperplane {
public:
  Hyperplane(const SpaceConfig &space, const Covector &normal) {
    detail::require_size(space, normal.size(), "Hyperplane");
    const double na = dual_norm(space, normal);
    if (!(na > 0.0) || !normal.finite())
      fail(ErrorKind::invalid_input, "Hyperplane: normal must be a nonzero finite covector");
    normal_ = normal / na;
  }

  const Covector &normal() const { return normal_; }

private:
  Covector normal_;
};

enum class Side { minus, plus };

/// Closed half-space H_-(a) = {<a,x> <= 0} or H_+(a) = {<a,x> >= 0}.
/// With the boundary through the origin this is a hypercone.
class HalfspaceCone {
public:
  HalfspaceCone(const SpaceConfig &space, const Covector &normal, Side side = Side::minus)
      : plane_(space, normal), side_(side) {}

  const Covector &normal() const { return plane_.normal(); }
  const Hyperplane &boundary() const { return plane_; }
  Side side() const { return side_; }

  /// Normal oriented so that membership reads <a,x> <= 0.
  Covector outward() const { return side_ == Side::minus ? normal() : -normal(); }

private:
  Hyperplane plane_;
  Side side_;
};

/// Finitely generated convex cone {sum t_i g_i : t_i >= 0}.
struct ConeSpec {
  std::vector<Vector> generators;
  std::optional<std::vector<Covector>> facet_normals;

  Eigen::MatrixXd matrix() const {
    if (generators.empty())
      return {};
    Eigen::MatrixXd g(generators.front().size(), static_cast<Eigen::Index>(generators.size()));
    for (std::size_t i = 0; i < generators.size(); ++i)
      g.col(static_cast<Eigen::Index>(i)) = generators[i].coords();
    return g;
  }

  void validate(const SpaceConfig &space, double tol = 1e-10) const {
    if (generators.empty())
      fail(ErrorKind::invalid_input, "generators: at least one generator is required");
    for (std::size_t i = 0; i < generators.size(); ++i) {
      const auto &g = generators[i];
      detail::require_size(space, g.size(), ("generators[" + std::to_string(i) + "]").c_str());
      if (!g.finite())
        fail(ErrorKind::invalid_input, "generators[" + std::to_string(i) + "]: non-finite entry");
      if (g.is_zero())
        fail(ErrorKind::invalid_input, "generators[" + std::to_string(i) + "]: zero generator");
    }
    if (!facet_normals)
      return;
    for (std::size_t k = 0; k < facet_normals->size(); ++k) {
      const auto &a = (*facet_normals)[k];
      detail::require_size(space, a.size(), ("facet_normals[" + std::to_string(k) + "]").c_str());
      for (std::size_t i = 0; i < generators.size(); ++i)
        if (pair(a, generators[i]) > tol)
          fail(ErrorKind::invalid_input, "facet_normals[" + std::to_string(k) + "]: generator " +
                                             std::to_string(i) + " violates the facet inequality");
    }
  }
};

/// Linear subspace given by a basis or as the kernel of functionals.
struct SubspaceSpec {
  struct Basis {
    std::vector<Vector> vectors;
  };
  struct KernelOf {
    std::vector<Covector> functionals;
  };
  std::variant<Basis, KernelOf> form;

  static SubspaceSpec from_basis(std::vector<Vector> basis) { return {Basis{std::move(basis)}}; }
  static SubspaceSpec kernel_of(std::vector<Covector> functionals) { return {KernelOf{std::move(functionals)}}; }
};

namespace detail {

inline Eigen::MatrixXd stack(const std::vector<Vector> &vs, int n) {
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i)
    m.col(static_cast<Eigen::Index>(i)) = vs[i].coords();
  return m;
}

inline Eigen::MatrixXd stack(const std::vector<Covector> &as, int n) {
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(as.size()));
  for (std::size_t i = 0; i < as.size(); ++i)
    m.col(static_cast<Eigen::Index>(i)) = as[i].coords();
  return m;
}

/// Sign convention for basis vectors: first nonzero coordinate positive.
inline void canonical_sign(Eigen::Ref<Eigen::VectorXd> v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) {
      if (v[i] < 0.0)
        v = -v;
      return;
    }
  }
}

inline Eigen::Index numerical_rank(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> &qr, double tol) {
  const auto &r = qr.matrixQR();
  const Eigen::Index k = std::min(r.rows(), r.cols());
  if (k == 0)
    return 0;
  const double lead = std::abs(r(0, 0));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(r(i, i)) > tol * std::max(1.0, lead))
      ++rank;
  return rank;
}

} // namespace detail

/// Orthonormal (Euclidean) basis of {x : <a_i, x> = 0 for all i}, computed
/// from a column-pivoted QR of the functional matrix.
inline std::vector<Vector> kernel_basis(const SpaceConfig &space, const std::vector<Covector> &functionals,
                                        double tol = 1e-10) {
  for (const auto &a : functionals)
    detail::require_size(space, a.size(), "kernel_of");
  if (functionals.empty()) {
    std::vector<Vector> all;
    for (int i = 0; i < space.n; ++i)
      all.push_back(Vector::unit(space.n, i));
    return all;
  }
  const Eigen::MatrixXd at = detail::stack(functionals, space.n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(at);
  const Eigen::Index rank = detail::numerical_rank(qr, tol);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(space.n, space.n);
  std::vector<Vector> basis;
  for (Eigen::Index j = rank; j < space.n; ++j) {
    Eigen::VectorXd v = q.col(j);
    detail::canonical_sign(v, tol);
    basis.emplace_back(std::move(v));
  }
  return basis;
}

/// Resolves either form to an independent basis; throws on rank deficiency.
inline std::vector<Vector> subspace_basis(const SpaceConfig &space, const SubspaceSpec &v, double tol = 1e-10) {
  if (const auto *k = std::get_if<SubspaceSpec::KernelOf>(&v.form))
    return kernel_basis(space, k->functionals, tol);
  const auto &basis = std::get<SubspaceSpec::Basis>(v.form).vectors;
  for (const auto &b : basis) {
    detail::require_size(space, b.size(), "basis");
    if (!b.finite())
      fail(ErrorKind::invalid_input, "basis: non-finite entry");
  }
  if (basis.empty())
    return basis;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(detail::stack(basis, space.n));
  if (detail::numerical_rank(qr, tol) < static_cast<Eigen::Index>(basis.size()))
    fail(ErrorKind::invalid_input, "basis: vectors are linearly dependent");
  return basis;
}

inline bool halfspace_contains(const HalfspaceCone &h, const Vector &x, double tol = 1e-7) {
  return pair(h.outward(), x) <= tol;
}

struct ConeMembership {
  bool contains = false;
  double deviation = 0.0; // min_{t >= 0} |x - G t|_p
  bool converged = true;
};

/// Membership in a finitely generated cone by a nonnegative least-deviation
/// fit in the l_p norm. Solver failure is reported through `converged`, never
/// as a plain "false".
inline ConeMembership cone_contains(const SpaceConfig &space, const ConeSpec &k, const Vector &x,
                                    const Tolerances &tol = {}) {
  k.validate(space);
  detail::require_size(space, x.size(), "cone_contains");
  if (x.is_zero())
    return {true, 0.0, true};
  const Eigen::MatrixXd g = k.matrix();
  detail::FitOptions opt;
  opt.tolerance = tol.solver;
  opt.max_iter = tol.max_iter;
  const auto fit = detail::fit_lp(g, x.coords(), space.p, Eigen::VectorXd::Zero(g.cols()), opt);
  const double dev = detail::lr_norm(fit.residual, space.p);
  return {dev <= tol.membership, dev, fit.converged};
}

/// Largest value of <a, g_i> over the generators (a is in the functional dual
/// wedge K^- iff this is <= 0).
inline double dual_wedge_violation(const ConeSpec &k, const Covector &a) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto &g : k.generators)
    worst = std::max(worst, pair(a, g));
  return worst;
}

inline bool dual_cone_contains(const ConeSpec &k, const Covector &a, double tol = 1e-7) {
  return dual_wedge_violation(k, a) <= tol;
}

/// A subspace as the cone generated by {+b_i, -b_i}.
inline ConeSpec subspace_as_cone(const SpaceConfig &space, const SubspaceSpec &v, double tol = 1e-10) {
  const auto basis = subspace_basis(space, v, tol);
  if (basis.empty())
    fail(ErrorKind::invalid_input, "subspace_as_cone: the zero subspace has no generators");
  ConeSpec k;
  for (const auto &b : basis) {
    k.generators.push_back(b);
    k.generators.push_back(-b);
  }
  return k;
}

/// {x : <a_j, x> <= 0 for all j} for linearly independent normals a_j, as a
/// generated cone: +/- a kernel basis plus one edge u_j per facet with
/// <a_i, u_j> = -delta_ij.
inline ConeSpec halfspace_intersection_cone(const SpaceConfig &space, const std::vector<Covector> &normals,
                                            double tol = 1e-10) {
  if (normals.empty())
    fail(ErrorKind::invalid_input, "facet_normals: at least one normal is required");
  const auto nk = static_cast<Eigen::Index>(normals.size());
  const Eigen::MatrixXd at = detail::stack(normals, space.n); // n x k
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(at);
  if (detail::numerical_rank(qr, tol) < nk)
    fail(ErrorKind::invalid_input, "facet_normals: normals are linearly dependent");
  // Minimum-norm U with A U = -I, i.e. U = -A^T (A A^T)^{-1}.
  const Eigen::MatrixXd gram = at.transpose() * at;
  const Eigen::MatrixXd edges = -at * gram.ldlt().solve(Eigen::MatrixXd::Identity(nk, nk));
  ConeSpec k;
  for (Eigen::Index j = 0; j < nk; ++j)
    k.generators.emplace_back(Eigen::VectorXd(edges.col(j)));
  for (const auto &b : kernel_basis(space, normals, tol)) {
    k.generators.push_back(b);
    k.generators.push_back(-b);
  }
  k.facet_normals = normals;
  return k;
}

inline ConeSpec as_cone(const SpaceConfig &space, const HalfspaceCone &h) {
  return halfspace_intersection_cone(space, {h.outward()});
}

/// Nonnegative orthant, generated by the unit vectors.
inline ConeSpec orthant(const SpaceConfig &space) {
  ConeSpec k;
  std::vector<Covector> facets;
  for (int i = 0; i < space.n; ++i) {
    k.generators.push_back(Vector::unit(space.n, i));
    facets.push_back(-Covector::unit(space.n, i));
  }
  k.facet_normals = std::move(facets);
  return k;
}

/// Extreme rays of the functional dual wedge K^- when they are known without
/// facet enumeration: the given facet normals, or -G^{-T} for simplicial K.
inline std::optional<std::vector<Covector>> dual_wedge_generators(const SpaceConfig &space, const ConeSpec &k,
                                                                  double tol = 1e-10) {
  if (k.facet_normals)
    return k.facet_normals;
  const Eigen::MatrixXd g = k.matrix();
  if (g.cols() != space.n)
    return std::nullopt;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
  if (detail::numerical_rank(qr, tol) < space.n)
    return std::nullopt;
  const Eigen::MatrixXd d = -qr.solve(Eigen::MatrixXd::Identity(space.n, space.n)).transpose();
  std::vector<Covector> out;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    out.emplace_back(Eigen::VectorXd(d.col(j)));
  return out;
}

} // namespace coneproj
