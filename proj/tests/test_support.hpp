#pragma once

#include <random>

#include "msbvp/msbvp.hpp"

namespace msbvp::testing {

// Scalar two-segment system with X_0 = 2, X_1 = 3, v_0 = 0.5, v_1 = 0.25 and
// B_a = B_b = 1, beta = 1. Hand elimination gives q = (0.5, 0.75) and
// c = (-3/28, 2/7).
inline BlockSystem synthetic_scalar_system() {
  std::vector<SegmentData> segments;
  segments.push_back({Matrix(1, 1, {2.0}), Vector{0.5}, 0});
  segments.push_back({Matrix(1, 1, {3.0}), Vector{0.25}, 1});
  return make_block_system(std::move(segments), Matrix(1, 1, {1.0}),
                           Matrix(1, 1, {1.0}), Vector{1.0});
}

inline Matrix random_well_conditioned(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng) + (i == j ? 2.0 : 0.0);
  return a;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace msbvp::testing
