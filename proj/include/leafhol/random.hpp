#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace leafhol {

/// Seeded generator with platform-independent draws (std distributions are
/// implementation-defined, the 64-bit Mersenne twister is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {lo, ..., hi}.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }

  int sign() { return (engine_() & 1u) ? 1 : -1; }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Eigen::VectorXd uniform_vector(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace leafhol
