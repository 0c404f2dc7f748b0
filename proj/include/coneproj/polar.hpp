#pragma once

#include <optional>
#include <vector>

#include "coneproj/projection.hpp"
#include "coneproj/rng.hpp"
#include "coneproj/sets.hpp"
#include "coneproj/space.hpp"

namespace coneproj {

/// Both polar-membership oracles evaluated at x / |x|.
struct PolarMembership {
  bool member = false;          // final decision (dual oracle, exact for generated cones)
  bool residual_member = false; // |P_K x| <= polar_residual
  bool dual_member = false;     // max_i <Jx, g_i/|g_i|> <= dual_band_low
  double residual_norm = 0.0;
  double dual_max = 0.0;
  bool boundary = false; // dual value inside the hysteresis band
  bool converged = true;

  /// Oracles disagree outside the hysteresis band.
  bool disagreement() const { return !boundary && residual_member != dual_member; }
};

/// Largest value of <J(u), g_i / |g_i|> for unit u.
inline double polar_dual_value(const SpaceConfig &space, const ConeSpec &k, const Vector &unit) {
  const Covector ju = duality_map(space, unit);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto &g : k.generators)
    worst = std::max(worst, pair(ju, g) / norm(space, g));
  return worst;
}

/// x is in K° = {x : P_K x = 0} tested twice: by the projection residual and
/// by pulling x back through J into the functional dual wedge K^-.
inline PolarMembership polar_membership(const SpaceConfig &space, const Vector &x, const ConeSpec &k,
                                        const Tolerances &tol = {}, ConeProjectionOptions copt = {}) {
  detail::require_size(space, x.size(), "polar_membership");
  PolarMembership m;
  if (x.is_zero()) {
    m.member = m.residual_member = m.dual_member = true;
    m.dual_max = 0.0;
    return m;
  }
  const Vector u = normalized(space, x);
  m.dual_max = polar_dual_value(space, k, u);
  m.dual_member = m.dual_max <= tol.dual_band_low;
  m.boundary = m.dual_max > -tol.dual_band_low && m.dual_max < tol.dual_band_high;
  const auto proj = project_cone(space, u, k, tol, copt);
  m.converged = proj.converged;
  m.residual_norm = norm(space, proj.point);
  m.residual_member = m.residual_norm <= tol.polar_residual;
  m.member = m.dual_member;
  return m;
}

/// Throws when the oracles disagree outside the hysteresis band.
inline bool in_polar(const SpaceConfig &space, const Vector &x, const ConeSpec &k, const Tolerances &tol = {}) {
  const auto m = polar_membership(space, x, k, tol);
  if (m.disagreement())
    fail(ErrorKind::oracle_disagreement, "polar_membership: residual oracle says " +
                                             std::string(m.residual_member ? "member" : "non-member") +
                                             " (|Px| = " + std::to_string(m.residual_norm) +
                                             ") but dual oracle value is " + std::to_string(m.dual_max));
  return m.member;
}

struct PolarSample {
  Vector direction; // unit in l_p
  bool membership = false;
  double residual_norm = 0.0;
  bool dual_certified = false;
};

/// Seeded draws of polar directions. Even draws are uniform directions on
/// the sphere, kept when they are polar; odd draws are directions of the dual
/// wedge K^- pushed through J*. Only members are returned.
inline std::vector<PolarSample> polar_sample(const SpaceConfig &space, const ConeSpec &k, int count,
                                             std::uint64_t seed, const Tolerances &tol = {}) {
  if (count < 1)
    fail(ErrorKind::invalid_input, "samples: count must be >= 1");
  k.validate(space, tol.rank);
  CounterRng rng(seed);
  const auto dual_gens = dual_wedge_generators(space, k, tol.rank);
  std::vector<PolarSample> out;
  for (int i = 0; i < count; ++i) {
    CounterRng draw = rng.split(static_cast<std::uint64_t>(i));
    Vector dir;
    if (i % 2 == 0) {
      dir = normalized(space, Vector(draw.gaussian(space.n)));
    } else if (dual_gens) {
      Covector a = Covector::zero(space.n);
      for (const auto &d : *dual_gens)
        a += (-std::log(1.0 - draw.uniform())) * d;
      if (a.is_zero())
        continue;
      dir = normalized(space, inverse_duality_map(space, a));
    } else {
      const Covector a(draw.gaussian(space.n));
      if (!dual_cone_contains(k, a, 0.0))
        continue;
      dir = normalized(space, inverse_duality_map(space, a));
    }
    if (dir.is_zero())
      continue;
    const auto m = polar_membership(space, dir, k, tol);
    if (!(m.member && m.residual_member))
      continue;
    out.push_back({dir, true, m.residual_norm, m.dual_member});
  }
  return out;
}

struct ConvexityWitness {
  Vector y1, y2;              // unit polar members
  Vector sum;                 // y1 + y2
  double residual = 0.0;      // |P_K(y1 + y2)|
  double dual_violation = 0.0; // max_i <J(y1 + y2), g_i/|g_i|>
};

enum class ConvexityVerdict { no_violation_found, nonconvex_with_witness };

inline const char *to_string(ConvexityVerdict v) {
  return v == ConvexityVerdict::no_violation_found ? "no-violation-found" : "nonconvex-with-witness";
}

struct ConvexityReport {
  ConvexityVerdict verdict = ConvexityVerdict::no_violation_found;
  int trials = 0;
  double max_dual_violation = 0.0;
  std::optional<ConvexityWitness> witness;
};

/// Re-derives a witness from its two members alone; true when it is still
/// double-certified.
inline bool verify_convexity_witness(const SpaceConfig &space, const ConeSpec &k, const ConvexityWitness &w,
                                     const Tolerances &tol = {}) {
  for (const Vector *y : {&w.y1, &w.y2}) {
    const auto m = polar_membership(space, *y, k, tol);
    if (!(m.member && m.residual_member))
      return false;
  }
  const Vector s = w.y1 + w.y2;
  const double dual = polar_dual_value(space, k, normalized(space, s)) * norm(space, s);
  const auto proj = project_cone(space, s, k, tol);
  return proj.converged && dual > tol.witness && norm(space, proj.point) > tol.witness;
}

/// Looks for y1, y2 in K° with y1 + y2 outside K°. Members are produced as
/// J*(a) for a in the dual wedge: extreme-ray pairs first, then random
/// nonnegative combinations. A violation counts only when both the dual value
/// and the projection residual exceed the witness tolerance.
inline ConvexityReport convexity_check(const SpaceConfig &space, const ConeSpec &k, int trials, std::uint64_t seed,
                                       const Tolerances &tol = {}) {
  if (trials < 1)
    fail(ErrorKind::invalid_input, "trials: must be >= 1");
  k.validate(space, tol.rank);
  ConvexityReport rep;
  CounterRng rng(seed);
  const auto dual_gens = dual_wedge_generators(space, k, tol.rank);

  auto draw_member = [&](CounterRng &r, std::optional<std::size_t> ray) -> std::optional<Vector> {
    Covector a = Covector::zero(space.n);
    if (dual_gens) {
      if (ray) {
        a = (*dual_gens)[*ray];
      } else {
        // Sparse random combination: each ray kept with probability 1/2.
        for (const auto &d : *dual_gens)
          if (r.uniform() < 0.5)
            a += (-std::log(1.0 - r.uniform())) * d;
      }
    } else {
      for (int attempt = 0; attempt < 64 && a.is_zero(); ++attempt) {
        Covector c(r.gaussian(space.n));
        if (dual_cone_contains(k, c, 0.0))
          a = c;
      }
    }
    if (a.is_zero())
      return std::nullopt;
    return normalized(space, inverse_duality_map(space, a));
  };

  std::vector<std::pair<std::size_t, std::size_t>> ray_pairs;
  if (dual_gens)
    for (std::size_t i = 0; i < dual_gens->size(); ++i)
      for (std::size_t j = i + 1; j < dual_gens->size(); ++j)
        ray_pairs.emplace_back(i, j);

  for (int t = 0; t < trials; ++t) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(t));
    std::optional<Vector> y1, y2;
    if (static_cast<std::size_t>(t) < ray_pairs.size()) {
      y1 = draw_member(r, ray_pairs[static_cast<std::size_t>(t)].first);
      y2 = draw_member(r, ray_pairs[static_cast<std::size_t>(t)].second);
    } else {
      y1 = draw_member(r, std::nullopt);
      y2 = draw_member(r, std::nullopt);
    }
    ++rep.trials;
    if (!y1 || !y2)
      continue;
    const Vector s = *y1 + *y2;
    if (s.is_zero())
      continue;
    const double dual = polar_dual_value(space, k, normalized(space, s)) * norm(space, s);
    rep.max_dual_violation = std::max(rep.max_dual_violation, dual);
    if (dual <= tol.witness)
      continue;
    const auto proj = project_cone(space, s, k, tol);
    const double residual = norm(space, proj.point);
    if (!proj.converged || residual <= tol.witness)
      continue;
    ConvexityWitness w{*y1, *y2, s, residual, dual};
    if (!verify_convexity_witness(space, k, w, tol))
      continue;
    rep.verdict = ConvexityVerdict::nonconvex_with_witness;
    rep.witness = std::move(w);
    break;
  }
  return rep;
}

/// The polar of H(a) is the line spanned by J*(a).
inline SubspaceSpec polar_of_hyperplane(const SpaceConfig &space, const Hyperplane &h) {
  return SubspaceSpec::from_basis({inverse_duality_map(space, h.normal())});
}

} // namespace coneproj
