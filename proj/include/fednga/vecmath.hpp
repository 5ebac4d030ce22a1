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


#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fednga {

// Flat parameter / gradient vector; every upload in a round has the same
// length p.
using ModelVector = std::vector<double>;

inline constexpr double kDefaultNormalizeEps = 1e-12;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double squared_norm(std::span<const double> v);
double squared_distance(std::span<const double> a, std::span<const double> b);

// Throws NonFiniteError carrying the first offending index.
void require_finite(std::span<const double> v, const char* what = "vector");
bool all_finite(std::span<const double> v) noexcept;

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
ModelVector scaled(std::span<const double> v, double factor);
ModelVector subtract(std::span<const double> a, std::span<const double> b);

// Unit-length copy of v. Vectors shorter than eps map to the zero vector
// (the client then contributes nothing to the round).
ModelVector normalize(std::span<const double> v,
                      double eps = kDefaultNormalizeEps);
bool is_degenerate(std::span<const double> v,
                   double eps = kDefaultNormalizeEps);

// sum_m weights[m] * vectors[m], accumulated in index order.
ModelVector weighted_sum(std::span<const ModelVector> vectors,
                         std::span<const double> weights);

}  // namespace fednga
