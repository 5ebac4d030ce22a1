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
#include <string_view>
#include <vector>

#include "fednga/vecmath.hpp"

namespace fednga {

enum class AggregatorTag {
  FedNGA,
  FedAvg,
  CoordMedian,
  TrimmedMean,
  Krum,
  GeomMedian,
};

inline constexpr std::size_t kNumAggregators = 6;

std::string_view to_string(AggregatorTag tag);
// Accepts the names produced by to_string; throws ValidationError otherwise.
AggregatorTag parse_aggregator(std::string_view name);

struct WeiszfeldOptions {
  double tol = 1e-10;  // relative step
  int max_iter = 100;
  double smoothing = 1e-8;

  bool operator==(const WeiszfeldOptions&) const = default;
};

// Tag plus the parameters of the rules that need them. trim_k is used by
// TrimmedMean only, krum_b by Krum only, weiszfeld by GeomMedian only.
struct AggregatorKind {
  AggregatorTag tag = AggregatorTag::FedNGA;
  std::size_t trim_k = 0;
  std::size_t krum_b = 0;
  WeiszfeldOptions weiszfeld{};

  bool operator==(const AggregatorKind&) const = default;
};

struct GeometricMedianResult {
  ModelVector point;
  int iterations = 0;
  bool converged = false;
  // Objective sum_m w_m ||u_m - y_k|| at y_0, y_1, ..., y_iterations.
  std::vector<double> objective_trace;
};

// Weights must lie in (0, 1] and sum to 1 within 1e-9.
void validate_weights(std::span<const double> weights, std::size_t num_uploads);

// sum_m w_m * u_m / ||u_m||. Uploads with norm below 1e-12 contribute zero.
ModelVector fed_nga(std::span<const ModelVector> uploads,
                    std::span<const double> weights);

ModelVector fedavg(std::span<const ModelVector> uploads,
                   std::span<const double> weights);

// Unweighted per-coordinate median; even counts average the middle pair.
ModelVector coordinate_median(std::span<const ModelVector> uploads);

// Per coordinate: drop the k lowest and k highest values, average the rest.
ModelVector trimmed_mean(std::span<const ModelVector> uploads, std::size_t k);

// Index of the upload whose summed squared distance to its M - b - 2
// nearest peers is smallest. Ties go to the lowest index.
std::size_t krum_select(std::span<const ModelVector> uploads, std::size_t b);
ModelVector krum(std::span<const ModelVector> uploads, std::size_t b);

// Smoothed Weiszfeld iteration started at the weighted mean.
GeometricMedianResult geometric_median(std::span<const ModelVector> uploads,
                                       std::span<const double> weights,
                                       const WeiszfeldOptions& options = {});

double geometric_median_objective(std::span<const ModelVector> uploads,
                                  std::span<const double> weights,
                                  std::span<const double> point);

// Dispatches on kind.tag. The median, trimmed-mean and Krum rules ignore
// the weights.
ModelVector aggregate(const AggregatorKind& kind,
                      std::span<const ModelVector> uploads,
                      std::span<const double> weights);

}  // namespace fednga
