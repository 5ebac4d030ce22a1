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


#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fednga/data.hpp"
#include "fednga/error.hpp"
#include "fednga/models.hpp"
#include "fednga/rng.hpp"
#include "helpers.hpp"

using namespace fednga;

namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

ModelVector jitter(ModelVector v, Rng& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  for (double& x : v) x += n(rng);
  return v;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("model spec parsing and sizes") {
  const ModelSpec mlp = parse_model_spec("mlp:784-200-200-10");
  CHECK(mlp.tag == ModelTag::MLP);
  CHECK(mlp.num_params() == 784 * 200 + 200 + 200 * 200 + 200 + 200 * 10 + 10);
  CHECK(to_string(mlp) == "mlp:784-200-200-10");
  CHECK(mlp == default_mlp());
  CHECK(parse_model_spec("logistic:4-2").num_params() == 10);
  CHECK(parse_model_spec("quadratic:7").num_params() == 7);
  CHECK_THROWS_AS((void)parse_model_spec("mlp:784-10"), ValidationError);
  CHECK_THROWS_AS((void)parse_model_spec("logistic:4"), ValidationError);
  CHECK_THROWS_AS((void)parse_model_spec("quadratic:3-4"), ValidationError);
  CHECK_THROWS_AS((void)parse_model_spec("cnn:3-4"), ValidationError);
  CHECK_THROWS_AS((void)parse_model_spec("mlp:3-x-2"), ValidationError);
  CHECK_THROWS_AS((void)parse_model_spec("mlp:3-0-2"), ValidationError);
  CHECK_THROWS_AS((void)parse_model_spec("mlp"), ValidationError);
}

TEST_CASE("quadratic loss example") {
  QuadraticTask t;
  t.dim = 2;
  t.curvature = {{1.0, 1.0}};
  t.centers = {{0.0, 0.0}};
  t.weights = {1.0};
  const LossGrad lg = loss_and_grad(t, 0, ModelVector{1.0, 1.0});
  CHECK(lg.loss == 1.0);
  CHECK(lg.grad == ModelVector{1.0, 1.0});
  CHECK_THROWS_AS((void)loss_and_grad(t, 0, ModelVector{1.0}), ValidationError);
  CHECK_THROWS_AS((void)loss_and_grad(t, 1, ModelVector{1.0, 1.0}), ValidationError);
}

TEST_CASE("logistic with zero parameters predicts uniformly") {
  Rng rng(71);
  const Dataset d = make_gaussian_blobs(10, 3, 2, 1.0, rng);
  const ModelSpec spec = parse_model_spec("logistic:3-2");
  const auto idx = iota_indices(10);
  const LossGrad lg = loss_and_grad(spec, ModelVector(spec.num_params(), 0.0), {&d, idx});
  CHECK(std::abs(lg.loss - std::log(2.0)) < 1e-12);
}

TEST_CASE("classifier dimension checks") {
  Rng rng(72);
  const Dataset d = make_gaussian_blobs(10, 3, 2, 1.0, rng);
  const auto idx = iota_indices(10);
  const ModelSpec spec = parse_model_spec("logistic:3-2");
  CHECK_THROWS_AS((void)loss_and_grad(spec, ModelVector(7, 0.0), {&d, idx}), ValidationError);
  const ModelSpec wrong = parse_model_spec("logistic:4-2");
  CHECK_THROWS_AS((void)loss_and_grad(wrong, ModelVector(10, 0.0), {&d, idx}), ValidationError);
  const std::vector<std::size_t> bad{0, 10};
  CHECK_THROWS_AS((void)loss_and_grad(spec, ModelVector(8, 0.0), {&d, bad}), ValidationError);
}

TEST_CASE("MLP gradient matches central differences on 16 samples") {
  Rng rng(73);
  const ModelSpec spec = parse_model_spec("mlp:6-8-5-3");
  const Dataset d = make_gaussian_blobs(16, 6, 3, 1.5, rng);
  const auto idx = iota_indices(16);
  for (int trial = 0; trial < 5; ++trial) {
    const ModelVector params = jitter(init_params(spec, rng), rng, 0.1);
    const LossGrad lg = loss_and_grad(spec, params, {&d, idx});
    const ModelVector fd = finite_diff_grad(spec, params, {&d, idx}, 1e-5);
    CHECK(relative_error(lg.grad, fd) < 1e-5);
    CHECK(lg.loss == doctest::Approx(loss_only(spec, params, {&d, idx})).epsilon(1e-14));
  }
}

TEST_CASE("finite differences on quadratic and logistic") {
  Rng rng(74);
  const QuadraticTask t = gen_quadratic_task({6, 3, 0.5, 4.0, 1.0, 1.0}, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelVector w = testing::random_vector(6, rng);
    const ModelVector fd = finite_diff_grad(t, 1, w);
    const ModelVector g = loss_and_grad(t, 1, w).grad;
    CHECK(relative_error(g, fd) < 1e-9);
  }
  const ModelSpec spec = parse_model_spec("logistic:4-2");
  REQUIRE(spec.num_params() == 10);
  const Dataset d = make_gaussian_blobs(12, 4, 2, 1.0, rng);
  const auto idx = iota_indices(12);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelVector params = testing::random_vector(10, rng, 0.5);
    const ModelVector fd = finite_diff_grad(spec, params, {&d, idx}, 1e-5);
    CHECK(relative_error(loss_and_grad(spec, params, {&d, idx}).grad, fd) < 1e-6);
  }
}

TEST_CASE("finite differences disagree at a ReLU kink") {
  // One hidden unit with zero weights and bias sits exactly on the kink for
  // every sample: analytic backprop uses ReLU'(0) = 0 while the central
  // difference sees half the slope.
  Rng rng(75);
  const ModelSpec spec = parse_model_spec("mlp:2-1-2");
  Dataset d = make_gaussian_blobs(4, 2, 2, 1.0, rng);
  d.labels.assign(4, 0);
  const auto idx = iota_indices(4);
  ModelVector params(spec.num_params(), 0.0);
  // Output layer weights (2 x 1) after W1 (1 x 2) and b1 (1).
  params[3] = 1.0;
  params[4] = -1.0;
  const ModelVector g = loss_and_grad(spec, params, {&d, idx}).grad;
  const ModelVector fd = finite_diff_grad(spec, params, {&d, idx}, 1e-5);
  CHECK(g[2] == 0.0);
  CHECK(std::abs(fd[2]) > 1e-3);
}

TEST_CASE("losses are additive over disjoint batches") {
  Rng rng(76);
  const ModelSpec spec = parse_model_spec("mlp:5-7-3");
  const Dataset d = make_gaussian_blobs(30, 5, 3, 1.0, rng);
  const ModelVector params = jitter(init_params(spec, rng), rng, 0.1);
  auto idx = iota_indices(30);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::vector<std::size_t> a(idx.begin(), idx.begin() + 11), b(idx.begin() + 11, idx.end());
  const LossGrad full = loss_and_grad(spec, params, {&d, idx});
  const LossGrad la = loss_and_grad(spec, params, {&d, a});
  const LossGrad lb = loss_and_grad(spec, params, {&d, b});
  CHECK(std::abs(full.loss - (11.0 * la.loss + 19.0 * lb.loss) / 30.0) < 1e-12);
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(std::abs(full.grad[i] - (11.0 * la.grad[i] + 19.0 * lb.grad[i]) / 30.0) < 1e-12);
  }
}

TEST_CASE("quadratic_optimum examples") {
  Rng rng(77);
  QuadraticTask t = gen_quadratic_task({4, 5, 1.0, 3.0, 0.0, 2.0}, rng);
  const ModelVector c = t.centers[0];
  const ModelVector same = quadratic_optimum(t);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same[i] == doctest::Approx(c[i]).epsilon(1e-14));
  t.curvature.assign(5, ModelVector(4, 1.0));
  for (std::size_t m = 0; m < 5; ++m) t.centers[m] = testing::random_vector(4, rng);
  ModelVector mean(4, 0.0);
  for (std::size_t m = 0; m < 5; ++m) axpy(t.weights[m], t.centers[m], mean);
  const ModelVector w = quadratic_optimum(t);
  for (std::size_t i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(mean[i]).epsilon(1e-14));
  for (int trial = 0; trial < 20; ++trial) {
    const QuadraticTask r = gen_quadratic_task({9, 7, 0.2, 5.0, 2.0, 1.0}, rng);
    CHECK(norm(global_loss_and_grad(r, quadratic_optimum(r)).grad) < 1e-10);
  }
}

TEST_CASE("evaluate on a separable set after fitting") {
  Rng rng(78);
  const Dataset d = make_gaussian_blobs(200, 2, 2, 12.0, rng);
  const ModelSpec spec = parse_model_spec("logistic:2-2");
  ModelVector params(spec.num_params(), 0.0);
  const auto idx = iota_indices(200);
  for (int it = 0; it < 500; ++it) axpy(-0.5, loss_and_grad(spec, params, {&d, idx}).grad, params);
  CHECK(evaluate(spec, params, d).accuracy == 1.0);
}

TEST_CASE("evaluate at chance on random labels") {
  Rng rng(79);
  Dataset d = make_gaussian_blobs(1000, 5, 10, 0.0, rng);
  std::uniform_int_distribution<int> label(0, 9);
  for (int& y : d.labels) y = label(rng);
  const ModelSpec spec = parse_model_spec("mlp:5-16-10");
  const ModelVector params = init_params(spec, rng);
  const Evaluation e = evaluate(spec, params, d);
  CHECK(std::abs(e.accuracy - 0.1) <= 0.03);
  CHECK(std::isfinite(e.loss));
  Dataset empty;
  empty.feature_dim = 5;
  empty.num_classes = 10;
  CHECK_THROWS_AS((void)evaluate(spec, params, empty), ValidationError);
}

TEST_CASE("evaluate breaks ties towards the lowest class") {
  Rng rng(80);
  const Dataset d = make_gaussian_blobs(9, 3, 3, 1.0, rng);
  const ModelSpec spec = parse_model_spec("logistic:3-3");
  // All-zero parameters tie every class: only label 0 counts as correct.
  const Evaluation e = evaluate(spec, ModelVector(spec.num_params(), 0.0), d);
  CHECK(e.accuracy == doctest::Approx(3.0 / 9.0));
}

TEST_CASE("init_params") {
  Rng rng(81);
  const ModelSpec spec = parse_model_spec("mlp:50-20-4");
  const ModelVector p = init_params(spec, rng);
  const double lim1 = std::sqrt(6.0 / 50.0), lim2 = std::sqrt(6.0 / 20.0);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(std::abs(p[i]) <= lim1);
  for (std::size_t i = 1000; i < 1020; ++i) CHECK(p[i] == 0.0);
  for (std::size_t i = 1020; i < 1100; ++i) CHECK(std::abs(p[i]) <= lim2);
  for (std::size_t i = 1100; i < 1104; ++i) CHECK(p[i] == 0.0);
  const ModelVector z = init_params(parse_model_spec("logistic:3-2"), rng);
  CHECK(z == ModelVector(8, 0.0));
}

}  // TEST_SUITE
