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


#include "fednga/vecmath.hpp"

#include <cmath>
#include <string>

#include "fednga/error.hpp"

namespace fednga {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ValidationError(std::string(op) + ": length mismatch (" +
                          std::to_string(a) + " vs " + std::to_string(b) +
                          ")");
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "squared_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

bool all_finite(std::span<const double> v) noexcept {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NonFiniteError(std::string(what) + ": non-finite entry at index " +
                               std::to_string(i),
                           i);
    }
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same_length(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

ModelVector scaled(std::span<const double> v, double factor) {
  ModelVector out(v.begin(), v.end());
  for (double& x : out) x *= factor;
  return out;
}

ModelVector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "subtract");
  ModelVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

bool is_degenerate(std::span<const double> v, double eps) {
  return norm(v) < eps;
}

ModelVector normalize(std::span<const double> v, double eps) {
  if (!(eps > 0.0)) throw ValidationError("normalize: eps must be positive");
  require_finite(v, "normalize");
  const double n = norm(v);
  ModelVector out(v.size(), 0.0);
  if (n < eps) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

ModelVector weighted_sum(std::span<const ModelVector> vectors,
                         std::span<const double> weights) {
  require_same_length(vectors.size(), weights.size(), "weighted_sum");
  if (vectors.empty()) throw ValidationError("weighted_sum: no vectors");
  const std::size_t p = vectors.front().size();
  ModelVector out(p, 0.0);
  for (std::size_t m = 0; m < vectors.size(); ++m) {
    require_same_length(vectors[m].size(), p, "weighted_sum");
    axpy(weights[m], vectors[m], out);
  }
  return out;
}

}  // namespace fednga
