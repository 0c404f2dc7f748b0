#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "coneproj/error.hpp"

namespace coneproj {

/// Numerical thresholds used across the library. Defaults are the values the
/// test-suites are pinned to; every field can be overridden per run.
struct Tolerances {
  double duality = 1e-10;        // <Jx,x> = |x|^2 and |Jx|_q = |x|_p (relative)
  double inversion = 1e-9;       // J*J = I (relative)
  double rank = 1e-10;           // rank decisions in kernel/basis conversion
  double membership = 1e-7;      // set membership decisions
  double solver = 1e-9;          // projected-gradient stopping threshold
  double certificate = 1e-7;     // variational certificate of cone projections
  double subspace_certificate = 1e-8;
  double line_certificate = 1e-9;
  double uniqueness = 1e-6;      // disagreement between solver starts
  double polar_residual = 1e-6;  // |P_K x| below this means x is in the polar
  double dual_band_low = 1e-8;   // dual values in (-low, high) are "boundary"
  double dual_band_high = 1e-6;
  double witness = 1e-5;         // certified violations must exceed this
  double linearity = 1e-8;       // relative defect of a linear map
  double exact = 1e-10;          // closed-form identities (no solver in the loop)
  int max_iter = 100000;
};

/// The ambient space l_p^n together with its dual l_q^n.
struct SpaceConfig {
  int n = 3;
  double p = 2.0;
  double q = 2.0;

  static constexpr double min_p = 1.05;
  static constexpr double max_p = 20.0;

  static SpaceConfig make(int n, double p) {
    if (n < 1)
      fail(ErrorKind::invalid_input, "dimension n must be >= 1, got " + std::to_string(n));
    if (!(p >= min_p && p <= max_p)) {
      std::ostringstream os;
      os << "exponent p must lie in [" << min_p << ", " << max_p << "], got " << p;
      fail(ErrorKind::invalid_input, os.str());
    }
    SpaceConfig s;
    s.n = n;
    s.p = p;
    s.q = p / (p - 1.0);
    return s;
  }

  bool hilbert() const { return p == 2.0; }

  /// The dual space l_q^n viewed as a primal space (exponents swapped).
  SpaceConfig dual() const {
    SpaceConfig s = *this;
    std::swap(s.p, s.q);
    return s;
  }
};

struct PrimalTag {};
struct DualTag {};

/// Coordinate array tagged with the space it lives in (X or X*), so that
/// points and functionals cannot be mixed up by accident.
template <class Tag> class Coords {
public:
  Coords() = default;
  explicit Coords(Eigen::VectorXd v) : v_(std::move(v)) {}
  Coords(std::initializer_list<double> values) : v_(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double x : values)
      v_[i++] = x;
  }

  static Coords zero(int n) { return Coords(Eigen::VectorXd::Zero(n)); }
  static Coords unit(int n, int i) {
    Coords c = zero(n);
    c.v_[i] = 1.0;
    return c;
  }
  static Coords constant(int n, double value) { return Coords(Eigen::VectorXd::Constant(n, value)); }

  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[i]; }
  double &operator[](int i) { return v_[i]; }

  const Eigen::VectorXd &coords() const { return v_; }
  Eigen::VectorXd &coords() { return v_; }

  bool is_zero() const { return v_.size() == 0 || v_.cwiseAbs().maxCoeff() == 0.0; }
  bool finite() const { return v_.allFinite(); }

  Coords &operator+=(const Coords &o) { v_ += o.v_; return *this; }
  Coords &operator-=(const Coords &o) { v_ -= o.v_; return *this; }
  Coords &operator*=(double s) { v_ *= s; return *this; }

  friend Coords operator+(Coords a, const Coords &b) { return a += b; }
  friend Coords operator-(Coords a, const Coords &b) { return a -= b; }
  friend Coords operator-(Coords a) { a.v_ = -a.v_; return a; }
  friend Coords operator*(double s, Coords a) { return a *= s; }
  friend Coords operator*(Coords a, double s) { return a *= s; }
  friend Coords operator/(Coords a, double s) { a.v_ /= s; return a; }

  friend bool operator==(const Coords &a, const Coords &b) { return a.v_ == b.v_; }

private:
  Eigen::VectorXd v_;
};

using Vector = Coords<PrimalTag>;
using Covector = Coords<DualTag>;

namespace detail {

inline void require_size(const SpaceConfig &space, int size, const char *what) {
  if (size != space.n)
    fail(ErrorKind::invalid_input, std::string(what) + ": dimension mismatch (expected " +
                                       std::to_string(space.n) + ", got " + std::to_string(size) + ")");
}

/// l_r norm with max-abs scaling so large exponents do not overflow.
inline double lr_norm(const Eigen::VectorXd &v, double r) {
  if (v.size() == 0)
    return 0.0;
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0)
    return 0.0;
  if (r == 2.0)
    return m * (v / m).norm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    s += std::pow(std::abs(v[i]) / m, r);
  return m * std::pow(s, 1.0 / r);
}

/// Normalized duality map of l_r: |v|^{2-r} |v_i|^{r-1} sign(v_i), written in
/// the scale-free form |v| (|v_i|/|v|)^{r-1} sign(v_i).
inline Eigen::VectorXd lr_duality(const Eigen::VectorXd &v, double r) {
  const double nv = lr_norm(v, r);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  if (nv == 0.0)
    return out;
  if (r == 2.0)
    return v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a == 0.0)
      continue;
    out[i] = std::copysign(nv * std::pow(a / nv, r - 1.0), v[i]);
  }
  return out;
}

} // namespace detail

inline double norm(const SpaceConfig &space, const Vector &x) {
  detail::require_size(space, x.size(), "norm");
  return detail::lr_norm(x.coords(), space.p);
}

inline double dual_norm(const SpaceConfig &space, const Covector &a) {
  detail::require_size(space, a.size(), "dual_norm");
  return detail::lr_norm(a.coords(), space.q);
}

/// Duality pairing <a, x>.
inline double pair(const Covector &a, const Vector &x) {
  if (a.size() != x.size())
    fail(ErrorKind::invalid_input, "pair: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                                       std::to_string(x.size()) + ")");
  return a.coords().dot(x.coords());
}

/// Normalized duality map J : X -> X*, J(0) = 0.
inline Covector duality_map(const SpaceConfig &space, const Vector &x) {
  detail::require_size(space, x.size(), "duality_map");
  return Covector(detail::lr_duality(x.coords(), space.p));
}

/// J* = J^{-1} : X* -> X, the duality map of l_q.
inline Vector inverse_duality_map(const SpaceConfig &space, const Covector &a) {
  detail::require_size(space, a.size(), "inverse_duality_map");
  return Vector(detail::lr_duality(a.coords(), space.q));
}

/// |x+y|^2 + |x-y|^2 - 2|x|^2 - 2|y|^2; identically zero iff the norm comes
/// from an inner product.
inline double parallelogram_defect(const SpaceConfig &space, const Vector &x, const Vector &y) {
  const double s = norm(space, x + y);
  const double d = norm(space, x - y);
  const double nx = norm(space, x);
  const double ny = norm(space, y);
  return s * s + d * d - 2.0 * nx * nx - 2.0 * ny * ny;
}

/// Rescale to the unit sphere of X; zero stays zero.
inline Vector normalized(const SpaceConfig &space, const Vector &x) {
  const double nx = norm(space, x);
  return nx == 0.0 ? x : x / nx;
}

inline Covector normalized(const SpaceConfig &space, const Covector &a) {
  const double na = dual_norm(space, a);
  return na == 0.0 ? a : a / na;
}

} // namespace coneproj
