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


#include "fednga/gradcheck.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "fednga/data.hpp"
#include "fednga/error.hpp"
#include "fednga/rng.hpp"
#include "fednga/vecmath.hpp"

namespace fednga {
namespace {

constexpr double kStep = 1e-5;

// Central differences restricted to `coords`.
ModelVector partial_fd(const std::function<double(std::span<const double>)>& f,
                       std::span<const double> x, std::span<const std::size_t> coords) {
  ModelVector probe(x.begin(), x.end());
  ModelVector out(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const std::size_t i = coords[k];
    const double orig = probe[i];
    probe[i] = orig + kStep;
    const double up = f(probe);
    probe[i] = orig - kStep;
    const double down = f(probe);
    probe[i] = orig;
    out[k] = (up - down) / (2.0 * kStep);
  }
  return out;
}

std::vector<std::size_t> pick_coords(std::size_t n, std::size_t max_coords, Rng& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (n <= max_coords) return all;
  std::vector<std::size_t> picked;
  picked.reserve(max_coords);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), max_coords, rng);
  return picked;
}

double trial_error(const std::function<double(std::span<const double>)>& f,
                   const ModelVector& x, const ModelVector& analytic,
                   std::size_t max_coords, Rng& rng) {
  const auto coords = pick_coords(x.size(), max_coords, rng);
  const ModelVector fd = partial_fd(f, x, coords);
  ModelVector sub(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) sub[k] = analytic[coords[k]];
  return relative_error(sub, fd);
}

}  // namespace

double gradcheck_tolerance(ModelTag tag) {
  return tag == ModelTag::MLP ? 1e-3 : 1e-5;
}

GradCheckResult gradient_check(const ModelSpec& spec, std::size_t trials,
                               std::uint64_t seed, std::size_t batch,
                               std::size_t max_coords) {
  validate(spec);
  if (trials == 0) throw ValidationError("gradcheck: trials must be at least 1");
  if (batch == 0) throw ValidationError("gradcheck: batch must be at least 1");
  if (max_coords == 0) throw ValidationError("gradcheck: max_coords must be at least 1");

  GradCheckResult result;
  result.spec = spec;
  result.tolerance = gradcheck_tolerance(spec.tag);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = make_rng(seed, Stream::GradCheck, {trial});
    double err = 0.0;
    if (spec.tag == ModelTag::Quadratic) {
      QuadraticTaskParams qp;
      qp.dim = spec.layers.front();
      qp.num_clients = 3;
      qp.center_spread = 0.5;
      const QuadraticTask task = gen_quadratic_task(qp, rng);
      const std::size_t client = trial % qp.num_clients;
      ModelVector w(qp.dim);
      for (double& v : w) v = normal(rng);
      const LossGrad lg = loss_and_grad(task, client, w);
      err = trial_error(
          [&](std::span<const double> x) { return loss_and_grad(task, client, x).loss; },
          w, lg.grad, max_coords, rng);
    } else {
      const std::size_t pool = std::max<std::size_t>(4 * batch, spec.num_classes());
      const Dataset data =
          make_gaussian_blobs(pool, spec.input_dim(), spec.num_classes(), 1.0, rng);
      std::vector<std::size_t> all(pool);
      std::iota(all.begin(), all.end(), std::size_t{0});
      std::vector<std::size_t> picked;
      std::sample(all.begin(), all.end(), std::back_inserter(picked),
                  std::min(batch, pool), rng);
      const SampleView view{&data, picked};
      ModelVector params = init_params(spec, rng);
      // Perturb every entry so that biases and zero-initialised models are
      // exercised too.
      for (double& v : params) v += 0.1 * normal(rng);
      const LossGrad lg = loss_and_grad(spec, params, view);
      err = trial_error(
          [&](std::span<const double> x) { return loss_only(spec, x, view); },
          params, lg.grad, max_coords, rng);
    }
    result.errors.push_back(err);
    result.max_error = std::max(result.max_error, err);
  }
  result.passed = result.max_error < result.tolerance;
  return result;
}

}  // namespace fednga
