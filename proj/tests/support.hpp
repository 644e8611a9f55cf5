#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "flatstrip/domain.hpp"

namespace flatstrip::test {

/// Seeded generator shared by the property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  Complex complex_in_disc(double r) {
    for (;;) {
      const Complex z(uniform(-r, r), uniform(-r, r));
      if (std::abs(z) < r) return z;
    }
  }
  /// SPD matrix whose tensor dilation has modulus <= max_dilation.
  Eigen::Matrix2d spd(double max_dilation) {
    const double m = uniform(0.0, max_dilation);
    const double theta = uniform(-3.14159, 3.14159);
    const double s = std::exp(uniform(-2.0, 2.0));
    // E + G = 2 s, (E - G) + 2iF = 2 s m e^{i theta}
    const double e = s * (1.0 + m * std::cos(theta));
    const double g = s * (1.0 - m * std::cos(theta));
    const double f = s * m * std::sin(theta);
    Eigen::Matrix2d a;
    a << e, f, f, g;
    return a;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace flatstrip::test
