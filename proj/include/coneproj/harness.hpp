#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "json.hpp"

#include "coneproj/polar.hpp"
#include "coneproj/projection.hpp"
#include "coneproj/rng.hpp"
#include "coneproj/sets.hpp"
#include "coneproj/space.hpp"

namespace coneproj {

using Json = nlohmann::ordered_json;

enum class Verdict { pass, fail_with_witness, inconclusive };

inline const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::pass:
    return "pass";
  case Verdict::fail_with_witness:
    return "fail-with-witness";
  case Verdict::inconclusive:
    return "inconclusive";
  }
  return "inconclusive";
}

inline Json to_json(const Vector &v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i)
    a.push_back(v[i]);
  return a;
}

inline Json to_json(const Covector &v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i)
    a.push_back(v[i]);
  return a;
}

inline Json to_json(const ConeSpec &k) {
  Json g = Json::array();
  for (const auto &v : k.generators)
    g.push_back(to_json(v));
  return g;
}

struct PropertyReport {
  std::string suite;
  SpaceConfig space;
  int trials = 0;
  int violations = 0;
  double max_residual = 0.0;
  std::optional<Json> witness;
  std::uint64_t seed = 0;
  Verdict verdict = Verdict::pass;
};

/// Accumulates trial outcomes into a report.
///
/// A trial value is already normalized by the caller. Values above
/// `fail_tol` are violations (the worst one is kept as witness); the verdict
/// is `pass` only if every value stayed at or below `pass_tol`.
class Tally {
public:
  Tally(std::string suite, const SpaceConfig &space, std::uint64_t seed, double pass_tol, double fail_tol)
      : pass_tol_(pass_tol), fail_tol_(fail_tol) {
    rep_.suite = std::move(suite);
    rep_.space = space;
    rep_.seed = seed;
  }

  template <class MakeWitness> void add(double value, MakeWitness &&make_witness) {
    ++rep_.trials;
    if (!(value <= rep_.max_residual))
      rep_.max_residual = value;
    if (value > fail_tol_ || !std::isfinite(value)) {
      ++rep_.violations;
      if (!rep_.witness || !(value <= worst_)) {
        worst_ = value;
        rep_.witness = make_witness();
      }
    }
  }

  void add(double value) {
    add(value, [] { return Json::object(); });
  }

  /// Folds a sub-report (same thresholds) into this one.
  void merge(const PropertyReport &r) {
    rep_.trials += r.trials;
    rep_.violations += r.violations;
    rep_.max_residual = std::max(rep_.max_residual, r.max_residual);
    if (r.witness && (!rep_.witness || r.max_residual > worst_)) {
      worst_ = r.max_residual;
      rep_.witness = r.witness;
    }
  }

  PropertyReport finish() const {
    PropertyReport r = rep_;
    if (r.violations > 0)
      r.verdict = Verdict::fail_with_witness;
    else if (r.max_residual <= pass_tol_)
      r.verdict = Verdict::pass;
    else
      r.verdict = Verdict::inconclusive;
    return r;
  }

private:
  PropertyReport rep_;
  double pass_tol_;
  double fail_tol_;
  double worst_ = 0.0;
};

using VectorMap = std::function<Vector(const Vector &)>;

// ---------------------------------------------------------------------------
// Random objects
// ---------------------------------------------------------------------------

/// Simplicial cone from n l_p-unit Gaussian directions, redrawn while any two
/// generators are closer than `min_angle` radians or the set is nearly
/// dependent.
inline ConeSpec random_simplicial_cone(const SpaceConfig &space, CounterRng &rng, double min_angle = 0.2) {
  for (;;) {
    ConeSpec k;
    for (int i = 0; i < space.n; ++i)
      k.generators.push_back(normalized(space, Vector(rng.gaussian(space.n))));
    bool ok = true;
    for (int i = 0; i < space.n && ok; ++i)
      for (int j = i + 1; j < space.n && ok; ++j) {
        const auto &a = k.generators[static_cast<std::size_t>(i)].coords();
        const auto &b = k.generators[static_cast<std::size_t>(j)].coords();
        const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
        ok = std::acos(c) >= min_angle;
      }
    if (!ok)
      continue;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(k.matrix());
    const auto &s = svd.singularValues();
    if (s[s.size() - 1] < 1e-3 * s[0])
      continue;
    return k;
  }
}

inline Vector random_vector(const SpaceConfig &space, CounterRng &rng) { return Vector(rng.gaussian(space.n)); }

inline Covector random_covector(const SpaceConfig &space, CounterRng &rng) {
  return Covector(rng.gaussian(space.n));
}

inline Vector ones(const SpaceConfig &space) { return Vector::constant(space.n, 1.0); }

// ---------------------------------------------------------------------------
// Retraction laws
// ---------------------------------------------------------------------------

/// Checks that (P, R) are mutually polar retractions on the sample points:
/// P+R = I, P^2 = P, R^2 = R, PR = RP = 0, P0 = R0 = 0, and Px = Rx only at 0.
inline PropertyReport check_retraction_laws(const SpaceConfig &space, const VectorMap &p_map, const VectorMap &r_map,
                                            const std::vector<Vector> &points, double tol = 1e-6,
                                            std::uint64_t seed = 0, std::string suite = "retraction-laws") {
  Tally tally(std::move(suite), space, seed, tol, tol);
  auto law = [&](const char *name, const Vector &x, double value) {
    tally.add(value / (1.0 + norm(space, x)), [&] {
      return Json{{"law", name}, {"x", to_json(x)}, {"value", value}};
    });
  };

  const Vector zero = Vector::zero(space.n);
  law("P0=0", zero, norm(space, p_map(zero)));
  law("R0=0", zero, norm(space, r_map(zero)));

  for (const auto &x : points) {
    const Vector px = p_map(x);
    const Vector rx = r_map(x);
    law("P+R=I", x, norm(space, px + rx - x));
    law("P^2=P", x, norm(space, p_map(px) - px));
    law("R^2=R", x, norm(space, r_map(rx) - rx));
    law("PR=0", x, norm(space, p_map(rx)));
    law("RP=0", x, norm(space, r_map(px)));
    // Px - Rx = 0 must force x = 0.
    const bool coincide = norm(space, px - rx) <= tol;
    law("Px=Rx=>x=0", x, coincide ? norm(space, x) : 0.0);
  }
  return tally.finish();
}

/// The coordinate maps of the positive-orthant examples: Q x = |x| and
/// P x = x^+ (coordinate-wise).
inline Vector abs_map(const Vector &x) { return Vector(Eigen::VectorXd(x.coords().cwiseAbs())); }
inline Vector positive_part(const Vector &x) { return Vector(Eigen::VectorXd(x.coords().cwiseMax(0.0))); }

// ---------------------------------------------------------------------------
// Linearity
// ---------------------------------------------------------------------------

struct LinearityProbe {
  Vector x, y;
  double alpha = 1.0, beta = 1.0;
};

/// |M(ax + by) - aMx - bMy|_p.
inline double linearity_defect(const SpaceConfig &space, const VectorMap &map, const LinearityProbe &pr) {
  const Vector lhs = map(pr.alpha * pr.x + pr.beta * pr.y);
  const Vector rhs = pr.alpha * map(pr.x) + pr.beta * map(pr.y);
  return norm(space, lhs - rhs);
}

/// Samples additivity and homogeneity defects. Deterministic probes run
/// first: every pair of unit vectors (e_i, e_j) with unit weights and each e_i
/// scaled by -2. Defects are normalized by 1 + |a x| + |b y|.
inline PropertyReport check_linearity(const SpaceConfig &space, const VectorMap &map, int trials, std::uint64_t seed,
                                      double tol = 1e-8, double witness_tol = 1e-5,
                                      std::string suite = "linearity") {
  Tally tally(std::move(suite), space, seed, tol, witness_tol);
  std::vector<LinearityProbe> probes;
  for (int i = 0; i < space.n; ++i)
    for (int j = i + 1; j < space.n; ++j)
      probes.push_back({Vector::unit(space.n, i), Vector::unit(space.n, j), 1.0, 1.0});
  for (int i = 0; i < space.n; ++i)
    probes.push_back({Vector::unit(space.n, i), Vector::zero(space.n), -2.0, 0.0});
  CounterRng rng(seed);
  for (int t = 0; t < trials; ++t) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(t));
    LinearityProbe pr{random_vector(space, r), random_vector(space, r), 0.0, 0.0};
    pr.alpha = r.uniform(-2.0, 2.0);
    pr.beta = r.uniform(-2.0, 2.0);
    probes.push_back(std::move(pr));
  }
  for (const auto &pr : probes) {
    const double defect = linearity_defect(space, map, pr);
    const double scale = 1.0 + std::abs(pr.alpha) * norm(space, pr.x) + std::abs(pr.beta) * norm(space, pr.y);
    tally.add(defect / scale, [&] {
      return Json{{"x", to_json(pr.x)}, {"y", to_json(pr.y)}, {"alpha", pr.alpha}, {"beta", pr.beta},
                  {"defect", defect}};
    });
  }
  return tally.finish();
}

// ---------------------------------------------------------------------------
// Plane preservation by J*
// ---------------------------------------------------------------------------

/// Euclidean distance of J*(c)/|J*(c)|_2 from span{J*a, J*b}.
inline double plane_distance(const SpaceConfig &space, const Covector &a, const Covector &b, const Covector &c) {
  Eigen::MatrixXd basis(space.n, 2);
  basis.col(0) = inverse_duality_map(space, a).coords();
  basis.col(1) = inverse_duality_map(space, b).coords();
  Eigen::VectorXd y = inverse_duality_map(space, c).coords();
  const double ny = y.norm();
  if (ny == 0.0)
    return 0.0;
  y /= ny;
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(y);
  return (y - basis * coef).norm();
}

/// J* should map span{a, b} into span{J*a, J*b}. The probe c = a + b runs
/// first, then random combinations.
inline PropertyReport check_plane_preservation(const SpaceConfig &space, const Covector &a, const Covector &b,
                                               int trials, std::uint64_t seed, const Tolerances &tol = {},
                                               std::string suite = "plane-preservation") {
  Eigen::MatrixXd ab(space.n, 2);
  ab.col(0) = a.coords();
  ab.col(1) = b.coords();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ab);
  if (detail::numerical_rank(qr, tol.rank) < 2)
    fail(ErrorKind::invalid_input, "check_plane_preservation: a and b must be linearly independent");
  Tally tally(std::move(suite), space, seed, tol.exact, tol.witness);
  CounterRng rng(seed);
  for (int t = -1; t < trials; ++t) {
    double alpha = 1.0, beta = 1.0;
    if (t >= 0) {
      CounterRng r = rng.split(static_cast<std::uint64_t>(t));
      alpha = r.normal();
      beta = r.normal();
    }
    const Covector c = alpha * a + beta * b;
    const double d = plane_distance(space, a, b, c);
    tally.add(d, [&] {
      return Json{{"a", to_json(a)}, {"b", to_json(b)}, {"c", to_json(c)},
                  {"image", to_json(inverse_duality_map(space, c))}, {"distance", d}};
    });
  }
  return tally.finish();
}

// ---------------------------------------------------------------------------
// Moreau decomposition (Hilbert case)
// ---------------------------------------------------------------------------

/// z = P_K z + R z with R z in K°, <P_K z, R z> = 0 and, when the polar
/// cone's generators are known, R z = P_{K°} z computed independently.
inline PropertyReport check_moreau(const SpaceConfig &space, const ConeSpec &k, const std::vector<Vector> &points,
                                   std::uint64_t seed = 0, const Tolerances &tol = {}) {
  if (!space.hilbert())
    fail(ErrorKind::unsupported, "moreau: the decomposition check requires p = 2");
  Tally tally("moreau", space, seed, tol.certificate, tol.certificate);
  std::optional<ConeSpec> polar_cone;
  if (const auto d = dual_wedge_generators(space, k, tol.rank)) {
    ConeSpec pc;
    for (const auto &a : *d)
      pc.generators.emplace_back(a.coords());
    polar_cone = std::move(pc);
  }
  for (const auto &z : points) {
    const auto pz = project_cone_checked(space, z, k, tol);
    const double scale = 1.0 + norm(space, z);
    auto witness = [&](const char *law, double value) {
      return [&, law, value] {
        return Json{{"law", law}, {"z", to_json(z)}, {"Pz", to_json(pz.point)}, {"Rz", to_json(pz.residual)},
                    {"value", value}};
      };
    };
    const double decomposition = norm(space, pz.point + pz.residual - z);
    tally.add(decomposition / scale, witness("z=Pz+Rz", decomposition));
    const double orth = std::abs(pair(duality_map(space, pz.point), pz.residual));
    tally.add(orth / (scale * scale), witness("<Pz,Rz>=0", orth));
    // max_i <J(Rz), g_i/|g_i|>, unnormalized: Rz may be rounding noise.
    const double polar =
        pz.residual.is_zero()
            ? 0.0
            : std::max(0.0, polar_dual_value(space, k, normalized(space, pz.residual)) * norm(space, pz.residual));
    tally.add(polar / scale, witness("Rz in polar", polar));
    if (polar_cone) {
      const auto qz = project_cone_checked(space, z, *polar_cone, tol);
      const double gap = norm(space, qz.point - pz.residual);
      tally.add(gap / scale, witness("Rz=P_polar z", gap));
    }
  }
  return tally.finish();
}

// ---------------------------------------------------------------------------
// Inner-product test
// ---------------------------------------------------------------------------

/// Parallelogram-law defect, normalized by 2|x|^2 + 2|y|^2. The probe
/// (e_1, e_2) runs first.
inline PropertyReport check_inner_product(const SpaceConfig &space, int trials, std::uint64_t seed,
                                          double pass_tol = 1e-12, double witness_tol = 1e-5) {
  Tally tally("inner-product", space, seed, pass_tol, witness_tol);
  std::vector<std::pair<Vector, Vector>> samples;
  if (space.n >= 2)
    samples.emplace_back(Vector::unit(space.n, 0), Vector::unit(space.n, 1));
  CounterRng rng(seed);
  for (int t = 0; t < trials; ++t) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(t));
    samples.emplace_back(random_vector(space, r), random_vector(space, r));
  }
  for (const auto &[x, y] : samples) {
    const double nx = norm(space, x), ny = norm(space, y);
    const double denom = 2.0 * nx * nx + 2.0 * ny * ny;
    const double defect = parallelogram_defect(space, x, y);
    tally.add(denom > 0.0 ? std::abs(defect) / denom : 0.0, [&] {
      return Json{{"x", to_json(x)}, {"y", to_json(y)}, {"defect", defect}};
    });
  }
  return tally.finish();
}

// ---------------------------------------------------------------------------
// Subspace linearity and counterexample searches
// ---------------------------------------------------------------------------

inline VectorMap subspace_projector(const SpaceConfig &space, const SubspaceSpec &v, const Tolerances &tol = {}) {
  const auto basis = subspace_basis(space, v, tol.rank);
  const auto spec = SubspaceSpec::from_basis(basis);
  return [space, spec, tol](const Vector &x) {
    auto r = project_subspace(space, x, spec, tol);
    if (!r.converged)
      fail(ErrorKind::solver_failure, "project_subspace: not certified (certificate " +
                                          std::to_string(r.certificate_max) + ")");
    return r.point;
  };
}

inline Json subspace_json(const SpaceConfig &space, const SubspaceSpec &v, const Tolerances &tol = {}) {
  Json basis = Json::array();
  for (const auto &b : subspace_basis(space, v, tol.rank))
    basis.push_back(to_json(b));
  return basis;
}

/// Random subspace of dimension `dim` (1 <= dim < n) as the span of Gaussian
/// vectors.
inline SubspaceSpec random_subspace(const SpaceConfig &space, CounterRng &rng, int dim) {
  std::vector<Vector> basis;
  for (int i = 0; i < dim; ++i)
    basis.push_back(random_vector(space, rng));
  return SubspaceSpec::from_basis(std::move(basis));
}

inline SubspaceSpec random_hyperplane_pair(const SpaceConfig &space, CounterRng &rng) {
  return SubspaceSpec::kernel_of({random_covector(space, rng), random_covector(space, rng)});
}

/// Linearity report of P_V with the subspace attached to the witness.
inline PropertyReport subspace_linearity(const SpaceConfig &space, const SubspaceSpec &v, int trials,
                                         std::uint64_t seed, const Tolerances &tol, std::string suite) {
  auto rep = check_linearity(space, subspace_projector(space, v, tol), trials, seed, tol.linearity, tol.witness,
                             std::move(suite));
  if (rep.witness)
    (*rep.witness)["subspace_basis"] = subspace_json(space, v, tol);
  return rep;
}

/// Re-evaluates a linearity witness from its payload through the public API.
inline double reverify_linearity_witness(const SpaceConfig &space, const Json &w, const Tolerances &tol = {}) {
  std::vector<Vector> basis;
  for (const auto &b : w.at("subspace_basis")) {
    Eigen::VectorXd v(space.n);
    for (int i = 0; i < space.n; ++i)
      v[i] = b.at(static_cast<std::size_t>(i)).get<double>();
    basis.emplace_back(std::move(v));
  }
  auto read = [&](const char *key) {
    Eigen::VectorXd v(space.n);
    for (int i = 0; i < space.n; ++i)
      v[i] = w.at(key).at(static_cast<std::size_t>(i)).get<double>();
    return Vector(std::move(v));
  };
  const LinearityProbe pr{read("x"), read("y"), w.at("alpha").get<double>(), w.at("beta").get<double>()};
  return linearity_defect(space, subspace_projector(space, SubspaceSpec::from_basis(basis), tol), pr);
}

inline void require_non_hilbert(const SpaceConfig &space, const char *what) {
  if (space.hilbert())
    fail(ErrorKind::invalid_input, std::string(what) + ": requires p != 2 (no counterexample exists for p = 2)");
  if (space.n < 3)
    fail(ErrorKind::invalid_input, std::string(what) + ": requires n >= 3");
}

/// Looks for a subspace with a nonlinear metric projection. span{(1,...,1)}
/// is always probed first; then `budget` random subspaces alternate between
/// random lines and kernels of random functional pairs. Stops at the first
/// certified witness; exhausting the budget is "inconclusive".
inline PropertyReport search_nonlinear_subspace(const SpaceConfig &space, std::uint64_t seed, int budget,
                                                const Tolerances &tol = {}, int trials_per_subspace = 16) {
  require_non_hilbert(space, "search_nonlinear_subspace");
  PropertyReport out;
  out.suite = "nonlinear-subspace";
  out.space = space;
  out.seed = seed;
  out.verdict = Verdict::inconclusive;
  CounterRng rng(seed);
  for (int c = -1; c < budget; ++c) {
    SubspaceSpec v;
    std::string origin = "probe";
    if (c < 0) {
      v = SubspaceSpec::from_basis({ones(space)});
    } else {
      CounterRng r = rng.split(static_cast<std::uint64_t>(c));
      if (c % 2 == 0) {
        v = random_subspace(space, r, 1);
        origin = "random-line";
      } else {
        v = random_hyperplane_pair(space, r);
        origin = "hyperplane-pair";
      }
    }
    const auto rep = subspace_linearity(space, v, trials_per_subspace, seed + static_cast<std::uint64_t>(c + 1),
                                        tol, out.suite);
    ++out.trials;
    out.max_residual = std::max(out.max_residual, rep.max_residual);
    if (rep.witness) {
      out.violations = 1;
      out.witness = *rep.witness;
      (*out.witness)["origin"] = origin;
      (*out.witness)["candidate"] = c + 1;
      out.verdict = Verdict::fail_with_witness;
      break;
    }
  }
  return out;
}

inline Json convexity_witness_json(const ConeSpec &k, const ConvexityWitness &w) {
  return Json{{"cone_generators", to_json(k)}, {"y1", to_json(w.y1)},
              {"y2", to_json(w.y2)},             {"sum", to_json(w.sum)},
              {"residual", w.residual},          {"dual_violation", w.dual_violation}};
}

inline ConeSpec cone_from_json(const SpaceConfig &space, const Json &generators) {
  ConeSpec k;
  for (const auto &g : generators) {
    Eigen::VectorXd v(space.n);
    for (int i = 0; i < space.n; ++i)
      v[i] = g.at(static_cast<std::size_t>(i)).get<double>();
    k.generators.emplace_back(std::move(v));
  }
  return k;
}

/// Re-derives a nonconvexity witness from its JSON payload alone.
inline bool reverify_convexity_witness(const SpaceConfig &space, const Json &w, const Tolerances &tol = {}) {
  const ConeSpec k = cone_from_json(space, w.at("cone_generators"));
  auto read = [&](const char *key) {
    Eigen::VectorXd v(space.n);
    for (int i = 0; i < space.n; ++i)
      v[i] = w.at(key).at(static_cast<std::size_t>(i)).get<double>();
    return Vector(std::move(v));
  };
  ConvexityWitness cw{read("y1"), read("y2"), read("sum"), 0.0, 0.0};
  return verify_convexity_witness(space, k, cw, tol);
}

/// Runs the convexity check over `budget` random simplicial cones and stops
/// at the first double-certified witness.
inline PropertyReport search_nonconvex_polar(const SpaceConfig &space, std::uint64_t seed, int budget,
                                             const Tolerances &tol = {}, int trials_per_cone = 400) {
  require_non_hilbert(space, "search_nonconvex_polar");
  PropertyReport out;
  out.suite = "nonconvex-polar";
  out.space = space;
  out.seed = seed;
  out.verdict = Verdict::inconclusive;
  CounterRng rng(seed);
  for (int c = 0; c < budget; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c));
    const ConeSpec k = random_simplicial_cone(space, r);
    const auto rep = convexity_check(space, k, trials_per_cone, r.next_u64(), tol);
    ++out.trials;
    out.max_residual = std::max(out.max_residual, rep.max_dual_violation);
    if (rep.witness) {
      out.violations = 1;
      out.witness = convexity_witness_json(k, *rep.witness);
      (*out.witness)["cone_index"] = c;
      out.verdict = Verdict::fail_with_witness;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The six assertions
// ---------------------------------------------------------------------------

struct EquivalenceOptions {
  bool allow_low_dim = false; // n <= 2 runs, consistency not asserted
  int subspaces = 12;
  int trials = 8;
  int cones = 40;
  int pair_trials = 200;
};

struct AssertionResult {
  std::string id;
  std::string statement;
  PropertyReport report;
};

struct EquivalenceReport {
  SpaceConfig space;
  std::uint64_t seed = 0;
  std::vector<AssertionResult> assertions;
  bool consistency_checked = true;
  bool consistent = true;
};

namespace detail {

/// (1,-1,0,...) and (0,1,-1,0,...): their common kernel contains (1,1,1,0,...).
inline std::pair<Covector, Covector> diagonal_pair(const SpaceConfig &space) {
  Covector a = Covector::zero(space.n), b = Covector::zero(space.n);
  a[0] = 1.0;
  a[1] = -1.0;
  b[1] = 1.0;
  if (space.n >= 3)
    b[2] = -1.0;
  else
    b[0] = 1.0;
  return {a, b};
}

/// (1,1,0,...) and (0,1,1,0,...) (or e_1, e_2 when n = 2).
inline std::pair<Covector, Covector> overlapping_pair(const SpaceConfig &space) {
  Covector a = Covector::zero(space.n), b = Covector::zero(space.n);
  if (space.n >= 3) {
    a[0] = a[1] = 1.0;
    b[1] = b[2] = 1.0;
  } else {
    a[0] = 1.0;
    b[1] = 1.0;
  }
  return {a, b};
}

/// Simplicial probe cone {x : <d_i, x> <= 0} with facets d_1 = (1,1,0,...),
/// d_2 = (0,1,1,0,...), d_3 = (1,0,1,0,...), d_k = e_k for k > 3.
inline ConeSpec probe_simplicial_cone(const SpaceConfig &space) {
  if (space.n < 3)
    return orthant(space);
  std::vector<Covector> facets;
  auto [a, b] = overlapping_pair(space);
  Covector c = Covector::zero(space.n);
  c[0] = c[2] = 1.0;
  facets = {a, b, c};
  for (int k = 3; k < space.n; ++k)
    facets.push_back(Covector::unit(space.n, k));
  auto cone = halfspace_intersection_cone(space, facets);
  return cone;
}

inline PropertyReport convexity_property(const SpaceConfig &space, const std::vector<ConeSpec> &cones,
                                         std::uint64_t seed, int pair_trials, const Tolerances &tol,
                                         std::string suite) {
  Tally tally(std::move(suite), space, seed, tol.exact, tol.witness);
  for (std::size_t c = 0; c < cones.size(); ++c) {
    const auto rep = convexity_check(space, cones[c], pair_trials, seed + c, tol);
    if (rep.witness) {
      const auto w = convexity_witness_json(cones[c], *rep.witness);
      tally.add(std::max(rep.witness->dual_violation, tol.witness * 2.0), [&] { return w; });
    } else {
      // Certified violations only count through a witness; the largest
      // uncertified dual value still decides between pass and inconclusive.
      tally.add(std::min(std::max(rep.max_dual_violation, 0.0), tol.witness));
    }
  }
  return tally.finish();
}

} // namespace detail

/// Runs the six assertions for one space. For n >= 3 they must agree:
/// all pass exactly when p = 2.
inline EquivalenceReport equivalence_report(const SpaceConfig &space, std::uint64_t seed,
                                            const EquivalenceOptions &opt = {}, const Tolerances &tol = {}) {
  if (space.n < 3 && !opt.allow_low_dim)
    fail(ErrorKind::invalid_input, "eloz: the equivalence needs n >= 3 (pass the low-dimension flag to run anyway)");
  EquivalenceReport out;
  out.space = space;
  out.seed = seed;
  CounterRng rng(seed);

  // (i) linearity of projections onto subspaces of every dimension.
  {
    Tally tally("subspace-linearity", space, seed, tol.linearity, tol.witness);
    if (space.n >= 2)
      tally.merge(subspace_linearity(space, SubspaceSpec::from_basis({ones(space)}), opt.trials, seed, tol,
                                     "subspace-linearity"));
    CounterRng r = rng.split(1);
    for (int s = 0; s < opt.subspaces && space.n >= 2; ++s) {
      const int dim = 1 + s % (space.n - 1);
      tally.merge(subspace_linearity(space, random_subspace(space, r, dim), opt.trials, r.next_u64(), tol,
                                     "subspace-linearity"));
    }
    out.assertions.push_back({"i", "metric projection onto every subspace is linear", tally.finish()});
  }
  // (ii) intersections of pairs of hyperplanes.
  {
    Tally tally("hyperplane-pair-linearity", space, seed, tol.linearity, tol.witness);
    const auto [a, b] = detail::diagonal_pair(space);
    tally.merge(subspace_linearity(space, SubspaceSpec::kernel_of({a, b}), opt.trials, seed, tol,
                                   "hyperplane-pair-linearity"));
    CounterRng r = rng.split(2);
    for (int s = 0; s < opt.subspaces; ++s)
      tally.merge(subspace_linearity(space, random_hyperplane_pair(space, r), opt.trials, r.next_u64(), tol,
                                     "hyperplane-pair-linearity"));
    out.assertions.push_back(
        {"ii", "metric projection onto the intersection of two hyperplanes is linear", tally.finish()});
  }
  // (iii) J* maps planes of X* to planes of X.
  {
    Tally tally("plane-preservation", space, seed, tol.exact, tol.witness);
    const auto [a, b] = detail::overlapping_pair(space);
    tally.merge(check_plane_preservation(space, a, b, opt.trials, seed, tol));
    CounterRng r = rng.split(3);
    for (int s = 0; s < opt.subspaces; ++s) {
      const Covector ra = random_covector(space, r), rb = random_covector(space, r);
      tally.merge(check_plane_preservation(space, ra, rb, opt.trials, r.next_u64(), tol));
    }
    out.assertions.push_back({"iii", "J* maps two-dimensional subspaces onto two-dimensional subspaces",
                              tally.finish()});
  }
  // (iv) polars of intersections of two half-spaces.
  {
    std::vector<ConeSpec> cones;
    const auto [a, b] = detail::overlapping_pair(space);
    cones.push_back(halfspace_intersection_cone(space, {a, b}));
    CounterRng r = rng.split(4);
    for (int s = 0; s < opt.subspaces; ++s)
      cones.push_back(halfspace_intersection_cone(space, {random_covector(space, r), random_covector(space, r)}));
    out.assertions.push_back({"iv", "the polar of the intersection of two half-spaces is convex",
                              detail::convexity_property(space, cones, seed, opt.pair_trials, tol,
                                                         "halfspace-pair-polar-convexity")});
  }
  // (v) polars of closed convex cones (sampled: simplicial cones).
  {
    std::vector<ConeSpec> cones{detail::probe_simplicial_cone(space)};
    CounterRng r = rng.split(5);
    for (int s = 0; s < opt.cones; ++s)
      cones.push_back(random_simplicial_cone(space, r));
    out.assertions.push_back({"v", "every closed convex cone has a convex polar",
                              detail::convexity_property(space, cones, seed, opt.pair_trials, tol,
                                                         "cone-polar-convexity")});
  }
  // (vi) the norm comes from an inner product.
  out.assertions.push_back(
      {"vi", "the space is an inner product space", check_inner_product(space, 4 * opt.subspaces, seed)});

  out.consistency_checked = space.n >= 3;
  const Verdict first = out.assertions.front().report.verdict;
  out.consistent = std::all_of(out.assertions.begin(), out.assertions.end(),
                               [&](const AssertionResult &a) { return a.report.verdict == first; }) &&
                   first != Verdict::inconclusive;
  return out;
}

// ---------------------------------------------------------------------------
// Named suites
// ---------------------------------------------------------------------------

struct SuiteOptions {
  int cones = 10;
  int points = 20;
};

namespace detail {

inline std::vector<Vector> sample_points(const SpaceConfig &space, CounterRng &rng, int count) {
  std::vector<Vector> pts;
  for (int i = 0; i < count; ++i)
    pts.push_back(random_vector(space, rng));
  return pts;
}

inline VectorMap cone_p(const SpaceConfig &space, const ConeSpec &k, const Tolerances &tol) {
  return [=](const Vector &x) { return project_cone_checked(space, x, k, tol).point; };
}

inline VectorMap cone_r(const SpaceConfig &space, const ConeSpec &k, const Tolerances &tol) {
  return [=](const Vector &x) { return retraction_R(space, x, k, tol); };
}

} // namespace detail

/// Mutually polar retraction laws for cone projections and the coordinate
/// examples (identity/zero, positive/negative part).
inline PropertyReport suite_kov(const SpaceConfig &space, std::uint64_t seed, const SuiteOptions &opt = {},
                                const Tolerances &tol = {}) {
  Tally tally("kov", space, seed, tol.polar_residual, tol.polar_residual);
  CounterRng rng(seed);
  CounterRng pts_rng = rng.split(0);
  const auto pts = detail::sample_points(space, pts_rng, opt.points);
  const VectorMap id = [](const Vector &x) { return x; };
  const VectorMap zero = [](const Vector &x) { return Vector::zero(x.size()); };
  tally.merge(check_retraction_laws(space, id, zero, pts, tol.polar_residual, seed, "kov"));
  const VectorMap neg = [](const Vector &x) { return x - positive_part(x); };
  tally.merge(check_retraction_laws(space, positive_part, neg, pts, tol.polar_residual, seed, "kov"));
  for (int c = 0; c < opt.cones; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c + 1));
    const ConeSpec k = random_simplicial_cone(space, r);
    tally.merge(check_retraction_laws(space, detail::cone_p(space, k, tol), detail::cone_r(space, k, tol), pts,
                                      tol.polar_residual, seed, "kov"));
  }
  return tally.finish();
}

/// P(x - Px) = 0, R idempotent, and R x in the polar, for random cones.
inline PropertyReport suite_footet(const SpaceConfig &space, std::uint64_t seed, const SuiteOptions &opt = {},
                                   const Tolerances &tol = {}) {
  Tally tally("footet", space, seed, tol.polar_residual, tol.polar_residual);
  CounterRng rng(seed);
  for (int c = 0; c < opt.cones; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c));
    const ConeSpec k = random_simplicial_cone(space, r);
    for (const auto &x : detail::sample_points(space, r, opt.points)) {
      const auto px = project_cone_checked(space, x, k, tol);
      const Vector rx = px.residual;
      const auto prx = project_cone_checked(space, rx, k, tol);
      const double scale = 1.0 + norm(space, x);
      auto witness = [&](const char *law, double v) {
        return [&, law, v] {
          return Json{{"law", law}, {"cone_generators", to_json(k)}, {"x", to_json(x)}, {"value", v}};
        };
      };
      const double pr = norm(space, prx.point);
      tally.add(pr / scale, witness("P(Rx)=0", pr));
      const double rr = norm(space, prx.residual - rx);
      tally.add(rr / scale, witness("R(Rx)=Rx", rr));
      const auto m = polar_membership(space, rx, k, tol);
      const double miss = m.member ? 0.0 : m.residual_norm;
      tally.add(miss, witness("Rx in polar", miss));
    }
  }
  return tally.finish();
}

/// The polar of H_-(J v) is the ray through v; the polar of H(a) is the line
/// through J*(a).
inline PropertyReport suite_felt(const SpaceConfig &space, std::uint64_t seed, const SuiteOptions &opt = {},
                                 const Tolerances &tol = {}) {
  Tally tally("felt", space, seed, 0.5, 0.5);
  CounterRng rng(seed);
  for (int c = 0; c < opt.cones; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c));
    const Vector v = normalized(space, random_vector(space, r));
    const ConeSpec k = as_cone(space, HalfspaceCone(space, duality_map(space, v)));
    std::vector<Vector> samples{v, 3.0 * v, -v};
    for (int i = 0; i < space.n; ++i)
      samples.push_back(v + 1e-3 * Vector::unit(space.n, i));
    for (int i = 0; i < opt.points; ++i)
      samples.push_back(normalized(space, random_vector(space, r)));
    for (const auto &u : samples) {
      const auto m = polar_membership(space, u, k, tol);
      const bool on_ray = norm(space, normalized(space, u) - v) <= tol.polar_residual;
      // An error counts only when both oracles agree on the wrong answer.
      const bool certified = !m.boundary && m.residual_member == m.dual_member;
      const double err = (certified && m.member != on_ray) ? 1.0 : 0.0;
      tally.add(err, [&] {
        return Json{{"v", to_json(v)}, {"u", to_json(u)}, {"member", m.member}, {"on_ray", on_ray}};
      });
    }
    // Both directions of the line J*(a) lie in the polar of H(a).
    const Hyperplane h(space, random_covector(space, r));
    const ConeSpec line_cone = subspace_as_cone(space, SubspaceSpec::kernel_of({h.normal()}));
    const auto dir = std::get<SubspaceSpec::Basis>(polar_of_hyperplane(space, h).form).vectors.front();
    for (const Vector &u : {dir, Vector(-dir)}) {
      const auto m = polar_membership(space, u, line_cone, tol);
      tally.add(m.member && m.residual_member ? 0.0 : 1.0,
                [&] { return Json{{"normal", to_json(h.normal())}, {"u", to_json(u)}, {"member", m.member}}; });
    }
  }
  return tally.finish();
}

/// Hyperplane projections are linear, and the closed form agrees with the
/// iterative subspace solver on ker{a}.
inline PropertyReport suite_projhyp(const SpaceConfig &space, std::uint64_t seed, const SuiteOptions &opt = {},
                                    const Tolerances &tol = {}) {
  Tally tally("projhyp", space, seed, tol.linearity, tol.linearity);
  CounterRng rng(seed);
  for (int c = 0; c < opt.cones; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c));
    const Hyperplane h(space, random_covector(space, r));
    const VectorMap closed = [&](const Vector &x) { return project_hyperplane(space, x, h).point; };
    auto lin = check_linearity(space, closed, opt.points, r.next_u64(), tol.linearity, tol.linearity, "projhyp");
    if (lin.witness)
      (*lin.witness)["normal"] = to_json(h.normal());
    tally.merge(lin);
    const auto kernel = SubspaceSpec::kernel_of({h.normal()});
    for (const auto &x : detail::sample_points(space, r, opt.points)) {
      const auto a = project_hyperplane(space, x, h);
      const auto b = project_subspace(space, x, kernel, tol);
      const double gap = norm(space, a.point - b.point) / (1.0 + norm(space, x));
      // Agreement is pinned at 1e-7, the iterative solver's accuracy.
      tally.add(gap * (tol.linearity / 1e-7), [&] {
        return Json{{"law", "closed form = iterative"}, {"normal", to_json(h.normal())}, {"x", to_json(x)},
                    {"gap", gap}};
      });
    }
  }
  return tally.finish();
}

/// The residual oracle and the dual oracle agree outside the hysteresis band.
inline PropertyReport suite_metsz(const SpaceConfig &space, std::uint64_t seed, const SuiteOptions &opt = {},
                                  const Tolerances &tol = {}) {
  Tally tally("metsz", space, seed, 0.5, 0.5);
  CounterRng rng(seed);
  for (int c = 0; c < opt.cones; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c));
    const ConeSpec k = random_simplicial_cone(space, r);
    const auto dual = dual_wedge_generators(space, k, tol.rank);
    for (int i = 0; i < opt.points; ++i) {
      Vector u;
      if (i % 2 == 0 || !dual) {
        u = normalized(space, random_vector(space, r));
      } else {
        Covector a = Covector::zero(space.n);
        for (const auto &d : *dual)
          a += r.uniform() * d;
        u = normalized(space, inverse_duality_map(space, a));
      }
      const auto m = polar_membership(space, u, k, tol);
      if (m.boundary)
        continue;
      tally.add(m.disagreement() ? 1.0 : 0.0, [&] {
        return Json{{"cone_generators", to_json(k)}, {"u", to_json(u)}, {"residual_norm", m.residual_norm},
                    {"dual_value", m.dual_max}};
      });
    }
  }
  return tally.finish();
}

/// Moreau decomposition for random simplicial cones (p = 2 only).
inline PropertyReport suite_moreau(const SpaceConfig &space, std::uint64_t seed, const SuiteOptions &opt = {},
                                   const Tolerances &tol = {}) {
  if (!space.hilbert())
    fail(ErrorKind::unsupported, "moreau: the decomposition check requires p = 2");
  Tally tally("moreau", space, seed, tol.certificate, tol.certificate);
  CounterRng rng(seed);
  for (int c = 0; c < opt.cones; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c));
    const ConeSpec k = random_simplicial_cone(space, r);
    tally.merge(check_moreau(space, k, detail::sample_points(space, r, opt.points), seed, tol));
  }
  return tally.finish();
}

/// Unique decomposition X = M + N for the linear pairs (P, I - P): the
/// hyperplane projections for every p, and subspace projections when p = 2.
/// Coefficients of x in the stacked basis [M N] are recovered by least
/// squares; the re-decomposition must reproduce x, Px and Rx.
inline PropertyReport suite_lpt(const SpaceConfig &space, std::uint64_t seed, const SuiteOptions &opt = {},
                                const Tolerances &tol = {}) {
  constexpr double lpt_tol = 1e-9;
  Tally tally("lpt", space, seed, lpt_tol, lpt_tol);
  CounterRng rng(seed);
  for (int c = 0; c < opt.cones; ++c) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(c));
    std::vector<Vector> m_basis, n_basis;
    VectorMap p_map;
    if (space.hilbert() && c % 2 == 1 && space.n >= 2) {
      const int dim = 1 + static_cast<int>(r.index(static_cast<std::size_t>(space.n - 1)));
      const auto v = random_subspace(space, r, dim);
      m_basis = subspace_basis(space, v, tol.rank);
      // Orthogonal complement = kernel of the basis read as functionals.
      std::vector<Covector> fs;
      for (const auto &b : m_basis)
        fs.emplace_back(b.coords());
      n_basis = kernel_basis(space, fs, tol.rank);
      p_map = subspace_projector(space, v, tol);
    } else {
      const Hyperplane h(space, random_covector(space, r));
      m_basis = kernel_basis(space, {h.normal()}, tol.rank);
      n_basis = {inverse_duality_map(space, h.normal())};
      p_map = [space, h](const Vector &x) { return project_hyperplane(space, x, h).point; };
    }
    Eigen::MatrixXd mn(space.n, static_cast<Eigen::Index>(m_basis.size() + n_basis.size()));
    Eigen::Index col = 0;
    for (const auto &b : m_basis)
      mn.col(col++) = b.coords();
    for (const auto &b : n_basis)
      mn.col(col++) = b.coords();
    // M + N = X and M ∩ N = {0}: the stacked basis is square and invertible.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mn);
    const auto &s = svd.singularValues();
    const double cond_gap = mn.cols() == space.n ? s[s.size() - 1] / s[0] : 0.0;
    tally.add(cond_gap > 1e-10 ? 0.0 : 1.0, [&] { return Json{{"law", "M+N=X, M∩N={0}"}, {"cond", cond_gap}}; });
    if (!(cond_gap > 1e-10))
      continue;
    const auto mdim = static_cast<Eigen::Index>(m_basis.size());
    for (const auto &x : detail::sample_points(space, r, opt.points)) {
      const Eigen::VectorXd coef = mn.colPivHouseholderQr().solve(x.coords());
      const Eigen::VectorXd mx = mn.leftCols(mdim) * coef.head(mdim);
      const Eigen::VectorXd nx = mn.rightCols(mn.cols() - mdim) * coef.tail(mn.cols() - mdim);
      const Vector px = p_map(x);
      const double scale = 1.0 + norm(space, x);
      const double recon = (mx + nx - x.coords()).norm() / scale;
      const double pgap = (mx - px.coords()).norm() / scale;
      const double rgap = (nx - (x - px).coords()).norm() / scale;
      tally.add(recon, [&] { return Json{{"law", "x=Mx+Nx"}, {"x", to_json(x)}, {"value", recon}}; });
      tally.add(pgap, [&] { return Json{{"law", "Mx=Px"}, {"x", to_json(x)}, {"value", pgap}}; });
      tally.add(rgap, [&] { return Json{{"law", "Nx=Rx"}, {"x", to_json(x)}, {"value", rgap}}; });
    }
  }
  return tally.finish();
}

inline const std::array<const char *, 8> &suite_names() {
  static const std::array<const char *, 8> names{"kov", "footet", "felt", "projhyp", "metsz", "moreau", "lpt", "eloz"};
  return names;
}

/// Dispatches every suite except `eloz`, which has its own report type.
inline PropertyReport run_suite(const std::string &name, const SpaceConfig &space, std::uint64_t seed,
                                const SuiteOptions &opt = {}, const Tolerances &tol = {}) {
  if (name == "kov")
    return suite_kov(space, seed, opt, tol);
  if (name == "footet")
    return suite_footet(space, seed, opt, tol);
  if (name == "felt")
    return suite_felt(space, seed, opt, tol);
  if (name == "projhyp")
    return suite_projhyp(space, seed, opt, tol);
  if (name == "metsz")
    return suite_metsz(space, seed, opt, tol);
  if (name == "moreau")
    return suite_moreau(space, seed, opt, tol);
  if (name == "lpt")
    return suite_lpt(space, seed, opt, tol);
  fail(ErrorKind::invalid_input, "suite: unknown suite '" + name + "'");
}

} // namespace coneproj
