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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fednga/error.hpp"
#include "fednga/rng.hpp"
#include "fednga/vecmath.hpp"

namespace fednga {

// Labelled samples, features stored row-major (num_samples x feature_dim).
struct Dataset {
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
};

// Throws ValidationError unless labels lie in [0, num_classes) and the
// feature buffer matches.
void validate(const Dataset& data);

// First n samples (n >= size() keeps everything).
Dataset prefix(const Dataset& data, std::size_t n);

// The indices of the parent dataset owned by one client.
struct Shard {
  std::size_t client = 0;
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

// Label-skew split: per class, proportions q ~ Dirichlet(beta * 1_M), each
// sample of the class goes to client m with probability q_m. Empty shards
// are repaired by taking one sample from the largest shard.
std::vector<Shard> dirichlet_partition(std::span<const int> labels,
                                       std::size_t num_clients, double beta,
                                       Rng& rng);

// alpha_m = S_m / sum_i S_i.
std::vector<double> shard_weights(std::span<const Shard> shards);

// F_m(w) = 0.5 (w - c_m)^T A_m (w - c_m) with diagonal A_m.
struct QuadraticTask {
  std::size_t dim = 0;
  double mu = 1.0;
  double L = 1.0;
  std::vector<ModelVector> curvature;  // diag(A_m), entries in [mu, L]
  std::vector<ModelVector> centers;    // c_m
  std::vector<double> weights;         // alpha_m

  std::size_t num_clients() const noexcept { return centers.size(); }
};

struct QuadraticTaskParams {
  std::size_t dim = 10;
  std::size_t num_clients = 20;
  double mu = 1.0;
  double L = 2.0;
  double center_spread = 0.0;
  // c_0 has i.i.d. N(0, center_scale^2) entries.
  double center_scale = 1.0;

  bool operator==(const QuadraticTaskParams&) const = default;
};

// Each diag(A_m) is uniform in [mu, L] with both endpoints present (dim >= 2),
// so every F_m is exactly mu-strongly convex and L-smooth. Clients are
// equally weighted; c_m = c_0 + center_spread * u_m, u_m uniform on the
// unit sphere.
QuadraticTask gen_quadratic_task(const QuadraticTaskParams& params, Rng& rng);

// Multiplies every local loss by factor (A_m -> factor * A_m); the optimum
// is unchanged.
QuadraticTask scale_losses(const QuadraticTask& task, double factor);

enum class IdxErrorKind { Unreadable, BadMagic, DimensionMismatch, Truncated };

class IdxFormatError : public FormatError {
 public:
  IdxFormatError(IdxErrorKind kind, const std::string& what)
      : FormatError(what), kind_(kind) {}
  IdxErrorKind kind() const noexcept { return kind_; }

 private:
  IdxErrorKind kind_;
};

// Big-endian IDX pair (images magic 0x00000803, labels 0x00000801). Pixels
// are scaled to [0, 1]. limit > 0 loads only the first `limit` samples.
Dataset load_mnist_idx(const std::filesystem::path& image_path,
                       const std::filesystem::path& label_path,
                       std::size_t limit = 0);

struct ByzantineSelection {
  std::vector<std::size_t> clients;  // ascending
  std::vector<std::size_t> order;    // the seeded visiting order
  double achieved = 0.0;             // sum of alpha_m over clients
};

// Visits clients in a seeded random order and keeps adding them while the
// cumulative weight stays <= target_fraction; stops at the first client that
// would overshoot.
ByzantineSelection select_byzantine(std::span<const double> weights,
                                    double target_fraction, Rng& rng);

// Isotropic Gaussian clusters around random class centres; labels cycle
// through the classes so the set is balanced.
Dataset make_gaussian_blobs(std::size_t num_samples, std::size_t feature_dim,
                            std::size_t num_classes, double separation,
                            Rng& rng);

}  // namespace fednga
