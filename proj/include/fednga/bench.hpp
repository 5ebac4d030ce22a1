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
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "fednga/aggregation.hpp"
#include "fednga/rng.hpp"

namespace fednga {

struct BenchResult {
  AggregatorTag kind = AggregatorTag::FedNGA;
  std::size_t p = 0;
  std::size_t num_clients = 0;
  std::size_t reps = 0;
  double median_ns = 0.0;
  double mean_ns = 0.0;
  double min_ns = 0.0;
  std::vector<std::int64_t> times_ns;
};

inline constexpr std::size_t kMinBenchReps = 5;
inline constexpr std::size_t kBenchWarmups = 2;

// Times only the aggregation call, single-threaded, on fresh N(0, 1) uploads
// generated before each timed call. Two untimed warm-up calls come first.
BenchResult bench_aggregator(const AggregatorKind& kind, std::size_t p,
                             std::size_t num_clients, std::size_t reps, Rng& rng);

// Least-squares slope of log(time) against log(scale). Needs >= 4 points
// with strictly increasing positive scales and positive times.
double fit_loglog_slope(std::span<const std::pair<double, double>> points);

// Header: aggregator,p,M,reps,median_ns,mean_ns,min_ns
void write_bench_csv(std::span<const BenchResult> results,
                     const std::filesystem::path& path);

}  // namespace fednga
