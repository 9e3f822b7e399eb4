// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "fieldfuse/geometry.hpp"

namespace fieldfuse {

/// splitmix64 finalizer; derives independent child seeds from (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Vec3 normal_vec3(Rng& rng, double stddev) {
  if (stddev <= 0.0) return Vec3::Zero();
  std::normal_distribution<double> n(0.0, stddev);
  const double x = n(rng), y = n(rng), z = n(rng);
  return Vec3(x, y, z);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Haar-uniform rotation (Shoemake).
inline Mat3 random_rotation(Rng& rng) {
  const double u1 = uniform(rng, 0.0, 1.0), u2 = uniform(rng, 0.0, 1.0), u3 = uniform(rng, 0.0, 1.0);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double tau = 2.0 * kPi;
  Eigen::Quaterniond q(b * std::cos(tau * u3), a * std::sin(tau * u2), a * std::cos(tau * u2), b * std::sin(tau * u3));
  return q.normalized().toRotationMatrix();
}

}  // namespace fieldfuse
