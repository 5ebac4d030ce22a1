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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fednga/data.hpp"
#include "fednga/rng.hpp"
#include "fednga/vecmath.hpp"

namespace fednga {

enum class ModelTag { Quadratic, Logistic, MLP };

// Layer widths. Quadratic: {p}. Logistic: {in, classes}. MLP: {in, hidden...,
// classes} with ReLU between layers. Parameters are flattened layer-major,
// each layer's weight matrix (out x in, row-major) followed by its biases.
struct ModelSpec {
  ModelTag tag = ModelTag::Quadratic;
  std::vector<std::size_t> layers{};

  std::size_t num_params() const;
  std::size_t num_classes() const { return layers.back(); }
  std::size_t input_dim() const { return layers.front(); }

  bool operator==(const ModelSpec&) const = default;
};

void validate(const ModelSpec& spec);
// "quadratic:10", "logistic:784-10", "mlp:784-200-200-10".
ModelSpec parse_model_spec(std::string_view text);
std::string to_string(const ModelSpec& spec);

// The MLP used in the MNIST experiments.
ModelSpec default_mlp();

struct LossGrad {
  double loss = 0.0;
  ModelVector grad;
};

// Samples of a dataset selected by index (a shard or a minibatch of one).
struct SampleView {
  const Dataset* data = nullptr;
  std::span<const std::size_t> indices{};
};

// Mean cross-entropy over the view and its gradient by backpropagation.
LossGrad loss_and_grad(const ModelSpec& spec, std::span<const double> params,
                       SampleView samples);
double loss_only(const ModelSpec& spec, std::span<const double> params,
                 SampleView samples);

// Client `client` of a quadratic task: 0.5 (w - c)^T A (w - c).
LossGrad loss_and_grad(const QuadraticTask& task, std::size_t client,
                       std::span<const double> w);
// F(w) = sum_m alpha_m F_m(w).
LossGrad global_loss_and_grad(const QuadraticTask& task,
                              std::span<const double> w);

// (sum alpha_m A_m)^{-1} sum alpha_m A_m c_m.
ModelVector quadratic_optimum(const QuadraticTask& task);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. Not meaningful at
// ReLU kinks within h of a sample's pre-activation.
ModelVector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x, double h = 1e-5);
ModelVector finite_diff_grad(const ModelSpec& spec,
                             std::span<const double> params,
                             SampleView samples, double h = 1e-5);
ModelVector finite_diff_grad(const QuadraticTask& task, std::size_t client,
                             std::span<const double> w, double h = 1e-5);

// ||a - b|| / max(||b||, tiny).
double relative_error(std::span<const double> a, std::span<const double> b);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Argmax accuracy (ties to the lowest class) and mean loss over all samples.
Evaluation evaluate(const ModelSpec& spec, std::span<const double> params,
                    const Dataset& test);

// He-uniform weights, zero biases. Quadratic and Logistic start at zero.
ModelVector init_params(const ModelSpec& spec, Rng& rng);

}  // namespace fednga
