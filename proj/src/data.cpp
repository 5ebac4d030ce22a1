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


#include "fednga/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace fednga {

namespace {

// Cumulative-weight comparisons tolerate accumulated rounding, so that ten
// clients of weight 0.1 reach a 0.3 target with exactly three of them.
constexpr double kWeightSlack = 1e-12;

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path,
                        const char* field) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (in.gcount() != 4) {
    throw IdxFormatError(IdxErrorKind::Truncated,
                         path.string() + ": truncated header (" + field + ")");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream open_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IdxFormatError(IdxErrorKind::Unreadable,
                         path.string() + ": cannot open file");
  }
  return in;
}

void expect_magic(std::uint32_t got, std::uint32_t want,
                  const std::filesystem::path& path) {
  if (got != want) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ": bad IDX magic 0x%08x (expected 0x%08x)",
                  got, want);
    throw IdxFormatError(IdxErrorKind::BadMagic, path.string() + buf);
  }
}

}  // namespace

void validate(const Dataset& data) {
  if (data.labels.empty()) throw ValidationError("dataset: no samples");
  if (data.num_classes == 0) throw ValidationError("dataset: no classes");
  if (data.features.size() != data.labels.size() * data.feature_dim) {
    throw ValidationError("dataset: feature buffer does not match shape");
  }
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= data.num_classes) {
      throw ValidationError("dataset: label " + std::to_string(y) +
                            " out of range");
    }
  }
}

Dataset prefix(const Dataset& data, std::size_t n) {
  n = std::min(n, data.size());
  Dataset out;
  out.feature_dim = data.feature_dim;
  out.num_classes = data.num_classes;
  out.labels.assign(data.labels.begin(), data.labels.begin() + n);
  out.features.assign(data.features.begin(),
                      data.features.begin() + n * data.feature_dim);
  return out;
}

std::vector<Shard> dirichlet_partition(std::span<const int> labels,
                                       std::size_t num_clients, double beta,
                                       Rng& rng) {
  if (num_clients == 0) {
    throw ValidationError("dirichlet_partition: need at least one client");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ValidationError("dirichlet_partition: beta must be positive");
  }
  if (labels.size() < num_clients) {
    throw ValidationError("dirichlet_partition: " +
                          std::to_string(labels.size()) + " samples for " +
                          std::to_string(num_clients) + " clients");
  }

  std::vector<Shard> shards(num_clients);
  for (std::size_t m = 0; m < num_clients; ++m) shards[m].client = m;

  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw ValidationError("dirichlet_partition: negative label");
    max_label = std::max(max_label, y);
  }
  std::vector<std::vector<std::size_t>> by_class(max_label + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i]].push_back(i);
  }

  std::gamma_distribution<double> gamma(beta, 1.0);
  std::vector<double> q(num_clients);
  for (const auto& members : by_class) {
    if (members.empty()) continue;
    double total = 0.0;
    for (double& x : q) {
      x = gamma(rng);
      total += x;
    }
    if (!(total > 0.0)) {
      // Every draw underflowed (tiny beta): the limiting Dirichlet puts all
      // mass on one client.
      std::fill(q.begin(), q.end(), 0.0);
      q[std::uniform_int_distribution<std::size_t>(0, num_clients - 1)(rng)] =
          1.0;
    }
    std::discrete_distribution<std::size_t> pick(q.begin(), q.end());
    for (std::size_t idx : members) shards[pick(rng)].indices.push_back(idx);
  }

  for (auto& shard : shards) {
    if (!shard.indices.empty()) continue;
    auto largest = std::max_element(
        shards.begin(), shards.end(),
        [](const Shard& a, const Shard& b) { return a.size() < b.size(); });
    shard.indices.push_back(largest->indices.back());
    largest->indices.pop_back();
  }
  for (auto& shard : shards) std::sort(shard.indices.begin(), shard.indices.end());
  return shards;
}

std::vector<double> shard_weights(std::span<const Shard> shards) {
  double total = 0.0;
  for (const auto& s : shards) total += static_cast<double>(s.size());
  if (!(total > 0.0)) throw ValidationError("shard_weights: empty shards");
  std::vector<double> w;
  w.reserve(shards.size());
  for (const auto& s : shards) w.push_back(static_cast<double>(s.size()) / total);
  return w;
}

QuadraticTask gen_quadratic_task(const QuadraticTaskParams& params, Rng& rng) {
  if (!(params.mu > 0.0) || !(params.mu <= params.L)) {
    throw ValidationError("gen_quadratic_task: need 0 < mu <= L");
  }
  if (params.dim == 0 || params.num_clients == 0) {
    throw ValidationError("gen_quadratic_task: dim and num_clients must be >= 1");
  }
  if (!(params.center_spread >= 0.0)) {
    throw ValidationError("gen_quadratic_task: center_spread must be >= 0");
  }
  const std::size_t p = params.dim;
  const std::size_t count = params.num_clients;

  QuadraticTask task;
  task.dim = p;
  task.mu = params.mu;
  task.L = params.L;
  task.weights.assign(count, 1.0 / static_cast<double>(count));

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ModelVector base(p);
  for (double& x : base) x = params.center_scale * normal(rng);

  std::vector<std::size_t> coords(p);
  for (std::size_t m = 0; m < count; ++m) {
    ModelVector diag(p);
    for (double& a : diag) a = params.mu + (params.L - params.mu) * unit(rng);
    if (p >= 2) {
      std::iota(coords.begin(), coords.end(), std::size_t{0});
      std::shuffle(coords.begin(), coords.end(), rng);
      diag[coords[0]] = params.mu;
      diag[coords[1]] = params.L;
    }
    task.curvature.push_back(std::move(diag));

    ModelVector dir(p);
    double n = 0.0;
    while (!(n > 0.0)) {
      for (double& x : dir) x = normal(rng);
      n = norm(dir);
    }
    ModelVector center = base;
    axpy(params.center_spread / n, dir, center);
    task.centers.push_back(std::move(center));
  }
  return task;
}

QuadraticTask scale_losses(const QuadraticTask& task, double factor) {
  if (!(factor > 0.0)) throw ValidationError("scale_losses: factor must be > 0");
  QuadraticTask out = task;
  for (auto& diag : out.curvature) {
    for (double& a : diag) a *= factor;
  }
  out.mu *= factor;
  out.L *= factor;
  return out;
}

Dataset load_mnist_idx(const std::filesystem::path& image_path,
                       const std::filesystem::path& label_path,
                       std::size_t limit) {
  std::ifstream images = open_idx(image_path);
  std::ifstream labels = open_idx(label_path);

  expect_magic(read_be32(images, image_path, "magic"), 0x00000803u, image_path);
  const std::size_t num_images = read_be32(images, image_path, "count");
  const std::size_t rows = read_be32(images, image_path, "rows");
  const std::size_t cols = read_be32(images, image_path, "cols");

  expect_magic(read_be32(labels, label_path, "magic"), 0x00000801u, label_path);
  const std::size_t num_labels = read_be32(labels, label_path, "count");

  if (num_images != num_labels) {
    throw IdxFormatError(IdxErrorKind::DimensionMismatch,
                         image_path.string() + " has " +
                             std::to_string(num_images) + " images but " +
                             label_path.string() + " has " +
                             std::to_string(num_labels) + " labels");
  }
  if (rows == 0 || cols == 0) {
    throw IdxFormatError(IdxErrorKind::DimensionMismatch,
                         image_path.string() + ": zero image dimension");
  }
  const std::size_t n = limit > 0 ? std::min(limit, num_images) : num_images;
  const std::size_t pixels = rows * cols;

  std::vector<unsigned char> raw(n * pixels);
  images.read(reinterpret_cast<char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(images.gcount()) != raw.size()) {
    throw IdxFormatError(IdxErrorKind::Truncated,
                         image_path.string() + ": truncated pixel data");
  }
  std::vector<unsigned char> raw_labels(n);
  labels.read(reinterpret_cast<char*>(raw_labels.data()),
              static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(labels.gcount()) != n) {
    throw IdxFormatError(IdxErrorKind::Truncated,
                         label_path.string() + ": truncated label data");
  }

  Dataset data;
  data.feature_dim = pixels;
  data.num_classes = 10;
  data.features.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) data.features[i] = raw[i] / 255.0;
  data.labels.reserve(n);
  for (unsigned char y : raw_labels) {
    if (y >= 10) {
      throw IdxFormatError(IdxErrorKind::DimensionMismatch,
                           label_path.string() + ": label " +
                               std::to_string(y) + " outside [0, 10)");
    }
    data.labels.push_back(y);
  }
  return data;
}

ByzantineSelection select_byzantine(std::span<const double> weights,
                                    double target_fraction, Rng& rng) {
  if (!(target_fraction >= 0.0 && target_fraction < 0.5)) {
    throw ValidationError("select_byzantine: target fraction must lie in [0, 0.5)");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("select_byzantine: weights must sum to 1");
  }
  ByzantineSelection sel;
  sel.order.resize(weights.size());
  std::iota(sel.order.begin(), sel.order.end(), std::size_t{0});
  std::shuffle(sel.order.begin(), sel.order.end(), rng);
  for (std::size_t m : sel.order) {
    if (sel.achieved + weights[m] > target_fraction + kWeightSlack) break;
    sel.achieved += weights[m];
    sel.clients.push_back(m);
  }
  std::sort(sel.clients.begin(), sel.clients.end());
  return sel;
}

Dataset make_gaussian_blobs(std::size_t num_samples, std::size_t feature_dim,
                            std::size_t num_classes, double separation,
                            Rng& rng) {
  if (num_samples == 0 || feature_dim == 0 || num_classes == 0) {
    throw ValidationError("make_gaussian_blobs: sizes must be positive");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> centres(num_classes * feature_dim);
  for (double& x : centres) x = separation * normal(rng);

  Dataset data;
  data.feature_dim = feature_dim;
  data.num_classes = num_classes;
  data.features.resize(num_samples * feature_dim);
  data.labels.resize(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const std::size_t c = i % num_classes;
    data.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < feature_dim; ++j) {
      data.features[i * feature_dim + j] =
          centres[c * feature_dim + j] + normal(rng);
    }
  }
  return data;
}

}  // namespace fednga
