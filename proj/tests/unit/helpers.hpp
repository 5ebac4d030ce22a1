/*
 * Copyright 2026 The fednga Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Shared helpers for the unit tests: seeded generators for property tests.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fednga/rng.hpp"
#include "fednga/vecmath.hpp"

namespace fednga::testing {

inline ModelVector random_vector(std::size_t dim, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  ModelVector v(dim);
  for (double& x : v) x = n(rng);
  return v;
}

inline std::vector<ModelVector> random_uploads(std::size_t count, std::size_t dim,
                                               Rng& rng, double scale = 1.0) {
  std::vector<ModelVector> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_vector(dim, rng, scale));
  return out;
}

// Positive weights summing to one.
inline std::vector<double> random_weights(std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(count);
  double total = 0.0;
  for (double& x : w) total += (x = u(rng));
  for (double& x : w) x /= total;
  return w;
}

inline std::vector<double> equal_weights(std::size_t count) {
  return std::vector<double>(count, 1.0 / static_cast<double>(count));
}

inline std::size_t uniform_int(std::size_t lo, std::size_t hi, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace fednga::testing
