#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace coneproj {

/// Counter-based random stream (SplitMix64 over a keyed counter).
///
/// Every draw is a pure function of (key, counter), so a report is
/// reproducible across platforms and independent substreams can be split off
/// by label without consuming draws from the parent. std:: distributions are
/// avoided on purpose: their output is implementation-defined.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}

  /// Independent child stream; does not advance this stream.
  CounterRng split(std::uint64_t label) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(label + 0x9e3779b97f4a7c15ULL));
    return child;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Index in [0, bound).
  std::size_t index(std::size_t bound) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(bound)) % bound;
  }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0)
      u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Eigen::VectorXd gaussian(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = normal();
    return v;
  }

  std::uint64_t draws() const { return counter_; }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace coneproj
