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


#include "fednga/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "fednga/error.hpp"

namespace fednga {

namespace {

volatile double g_sink = 0.0;

std::vector<ModelVector> random_uploads(std::size_t p, std::size_t count, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ModelVector> uploads(count, ModelVector(p));
  for (auto& u : uploads) {
    for (double& x : u) x = normal(rng);
  }
  return uploads;
}

}  // namespace

BenchResult bench_aggregator(const AggregatorKind& kind, std::size_t p,
                             std::size_t num_clients, std::size_t reps, Rng& rng) {
  if (p == 0 || num_clients == 0) {
    throw ValidationError("bench_aggregator: p and M must be >= 1");
  }
  if (reps < kMinBenchReps) {
    throw ValidationError("bench_aggregator: need at least 5 repetitions");
  }
  const std::vector<double> weights(num_clients, 1.0 / static_cast<double>(num_clients));
  BenchResult result;
  result.kind = kind.tag;
  result.p = p;
  result.num_clients = num_clients;
  result.reps = reps;

  for (std::size_t r = 0; r < kBenchWarmups + reps; ++r) {
    const auto uploads = random_uploads(p, num_clients, rng);
    const auto start = std::chrono::steady_clock::now();
    const ModelVector out = aggregate(kind, uploads, weights);
    const auto stop = std::chrono::steady_clock::now();
    g_sink = g_sink + out[0];
    if (r < kBenchWarmups) continue;
    result.times_ns.push_back(
        std::max<std::int64_t>(1, std::chrono::duration_cast<std::chrono::nanoseconds>(
                                      stop - start)
                                      .count()));
  }

  std::vector<std::int64_t> sorted = result.times_ns;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  result.median_ns = n % 2 ? static_cast<double>(sorted[n / 2])
                           : 0.5 * static_cast<double>(sorted[n / 2 - 1] + sorted[n / 2]);
  result.mean_ns = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  result.min_ns = static_cast<double>(sorted.front());
  return result;
}

double fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 4) throw ValidationError("fit_loglog_slope: need >= 4 points");
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [s, t] = points[i];
    if (!(s > 0.0) || !(t > 0.0)) {
      throw ValidationError("fit_loglog_slope: scales and times must be positive");
    }
    if (i > 0 && !(s > points[i - 1].first)) {
      throw ValidationError("fit_loglog_slope: scales must be strictly increasing");
    }
    mean_x += std::log(s);
    mean_y += std::log(t);
  }
  const double n = static_cast<double>(points.size());
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [s, t] : points) {
    const double dx = std::log(s) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(t) - mean_y);
  }
  return sxy / sxx;
}

void write_bench_csv(std::span<const BenchResult> results,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "aggregator,p,M,reps,median_ns,mean_ns,min_ns\n";
  char buf[160];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%.17g,%.17g,%.17g\n",
                  std::string(to_string(r.kind)).c_str(), r.p, r.num_clients, r.reps,
                  r.median_ns, r.mean_ns, r.min_ns);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace fednga
