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


#include "fednga/aggregation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "fednga/error.hpp"

namespace fednga {

namespace {

constexpr std::array<std::pair<AggregatorTag, std::string_view>,
                     kNumAggregators>
    kNames{{
        {AggregatorTag::FedNGA, "fednga"},
        {AggregatorTag::FedAvg, "fedavg"},
        {AggregatorTag::CoordMedian, "median"},
        {AggregatorTag::TrimmedMean, "trimmed_mean"},
        {AggregatorTag::Krum, "krum"},
        {AggregatorTag::GeomMedian, "geomedian"},
    }};

std::size_t common_length(std::span<const ModelVector> uploads,
                          const char* op) {
  if (uploads.empty()) {
    throw ValidationError(std::string(op) + ": no uploads");
  }
  const std::size_t p = uploads.front().size();
  for (const auto& u : uploads) {
    if (u.size() != p) {
      throw ValidationError(std::string(op) + ": upload length mismatch");
    }
  }
  return p;
}

}  // namespace

std::string_view to_string(AggregatorTag tag) {
  for (const auto& [t, name] : kNames) {
    if (t == tag) return name;
  }
  return "unknown";
}

AggregatorTag parse_aggregator(std::string_view name) {
  for (const auto& [t, n] : kNames) {
    if (n == name) return t;
  }
  throw ValidationError("unknown aggregator '" + std::string(name) + "'");
}

void validate_weights(std::span<const double> weights,
                      std::size_t num_uploads) {
  if (weights.size() != num_uploads) {
    throw ValidationError("weights: expected " + std::to_string(num_uploads) +
                          " entries, got " + std::to_string(weights.size()));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0 && w <= 1.0)) {
      throw ValidationError("weights: each weight must lie in (0, 1]");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("weights: sum is " + std::to_string(total) +
                          ", expected 1");
  }
}

ModelVector fed_nga(std::span<const ModelVector> uploads,
                    std::span<const double> weights) {
  const std::size_t p = common_length(uploads, "fed_nga");
  validate_weights(weights, uploads.size());
  ModelVector out(p, 0.0);
  for (std::size_t m = 0; m < uploads.size(); ++m) {
    require_finite(uploads[m], "fed_nga upload");
    const double n = norm(uploads[m]);
    if (n < kDefaultNormalizeEps) continue;
    axpy(weights[m] / n, uploads[m], out);
  }
  return out;
}

ModelVector fedavg(std::span<const ModelVector> uploads,
                   std::span<const double> weights) {
  common_length(uploads, "fedavg");
  validate_weights(weights, uploads.size());
  return weighted_sum(uploads, weights);
}

ModelVector coordinate_median(std::span<const ModelVector> uploads) {
  const std::size_t p = common_length(uploads, "coordinate_median");
  const std::size_t count = uploads.size();
  const std::size_t mid = count / 2;
  ModelVector out(p);
  std::vector<double> column(count);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t m = 0; m < count; ++m) column[m] = uploads[m][i];
    std::nth_element(column.begin(), column.begin() + mid, column.end());
    const double upper = column[mid];
    if (count % 2 == 1) {
      out[i] = upper;
    } else {
      const double lower = *std::max_element(column.begin(),
                                              column.begin() + mid);
      out[i] = (lower + upper) / 2.0;
    }
  }
  return out;
}

ModelVector trimmed_mean(std::span<const ModelVector> uploads, std::size_t k) {
  const std::size_t p = common_length(uploads, "trimmed_mean");
  const std::size_t count = uploads.size();
  if (2 * k >= count) {
    throw ValidationError("trimmed_mean: need 2k < M (k=" + std::to_string(k) +
                          ", M=" + std::to_string(count) + ")");
  }
  const std::size_t kept = count - 2 * k;
  ModelVector out(p);
  std::vector<double> column(count);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t m = 0; m < count; ++m) column[m] = uploads[m][i];
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (std::size_t j = k; j < count - k; ++j) acc += column[j];
    out[i] = acc / static_cast<double>(kept);
  }
  return out;
}

std::size_t krum_select(std::span<const ModelVector> uploads, std::size_t b) {
  common_length(uploads, "krum");
  const std::size_t count = uploads.size();
  if (count < b + 3) {
    throw ValidationError("krum: need M - b - 2 >= 1 (M=" +
                          std::to_string(count) + ", b=" + std::to_string(b) +
                          ")");
  }
  const std::size_t neighbours = count - b - 2;

  std::vector<double> dist(count * count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      const double d = squared_distance(uploads[i], uploads[j]);
      dist[i * count + j] = d;
      dist[j * count + i] = d;
    }
  }

  std::size_t best = 0;
  double best_score = 0.0;
  std::vector<double> row;
  row.reserve(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    row.clear();
    for (std::size_t j = 0; j < count; ++j) {
      if (j != i) row.push_back(dist[i * count + j]);
    }
    std::partial_sort(row.begin(), row.begin() + neighbours, row.end());
    double score = 0.0;
    for (std::size_t j = 0; j < neighbours; ++j) score += row[j];
    if (i == 0 || score < best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

ModelVector krum(std::span<const ModelVector> uploads, std::size_t b) {
  return uploads[krum_select(uploads, b)];
}

double geometric_median_objective(std::span<const ModelVector> uploads,
                                  std::span<const double> weights,
                                  std::span<const double> point) {
  double acc = 0.0;
  for (std::size_t m = 0; m < uploads.size(); ++m) {
    acc += weights[m] * std::sqrt(squared_distance(uploads[m], point));
  }
  return acc;
}

GeometricMedianResult geometric_median(std::span<const ModelVector> uploads,
                                       std::span<const double> weights,
                                       const WeiszfeldOptions& options) {
  const std::size_t p = common_length(uploads, "geometric_median");
  validate_weights(weights, uploads.size());
  if (!(options.tol > 0.0) || options.max_iter < 1 ||
      !(options.smoothing > 0.0)) {
    throw ValidationError(
        "geometric_median: need tol > 0, max_iter >= 1, smoothing > 0");
  }

  GeometricMedianResult result;
  ModelVector y = weighted_sum(uploads, weights);
  ModelVector next(p);
  std::vector<double> dists(uploads.size());

  auto distances_to = [&](std::span<const double> point) {
    double objective = 0.0;
    for (std::size_t m = 0; m < uploads.size(); ++m) {
      dists[m] = std::sqrt(squared_distance(uploads[m], point));
      objective += weights[m] * dists[m];
    }
    return objective;
  };

  result.objective_trace.push_back(distances_to(y));
  for (int k = 0; k < options.max_iter; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    double total = 0.0;
    for (std::size_t m = 0; m < uploads.size(); ++m) {
      const double c = weights[m] / std::max(dists[m], options.smoothing);
      axpy(c, uploads[m], next);
      total += c;
    }
    for (double& x : next) x /= total;

    const double step = std::sqrt(squared_distance(next, y));
    y.swap(next);
    result.iterations = k + 1;
    result.objective_trace.push_back(distances_to(y));
    // Relative to ||y||, floored at 1 so a median near the origin still stops.
    if (step < options.tol * std::max(norm(y), 1.0)) {
      result.converged = true;
      break;
    }
  }
  result.point = std::move(y);
  return result;
}

ModelVector aggregate(const AggregatorKind& kind,
                      std::span<const ModelVector> uploads,
                      std::span<const double> weights) {
  switch (kind.tag) {
    case AggregatorTag::FedNGA:
      return fed_nga(uploads, weights);
    case AggregatorTag::FedAvg:
      return fedavg(uploads, weights);
    case AggregatorTag::CoordMedian:
      return coordinate_median(uploads);
    case AggregatorTag::TrimmedMean:
      return trimmed_mean(uploads, kind.trim_k);
    case AggregatorTag::Krum:
      return krum(uploads, kind.krum_b);
    case AggregatorTag::GeomMedian:
      return geometric_median(uploads, weights, kind.weiszfeld).point;
  }
  throw ValidationError("aggregate: unknown aggregator");
}

}  // namespace fednga
