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


#include "fednga/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "fednga/error.hpp"

namespace fednga {

namespace {

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

std::vector<LayerShape> layer_shapes(const ModelSpec& spec) {
  std::vector<LayerShape> shapes;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layers.size(); ++l) {
    LayerShape s;
    s.in = spec.layers[l];
    s.out = spec.layers[l + 1];
    s.weight_offset = offset;
    s.bias_offset = offset + s.in * s.out;
    offset = s.bias_offset + s.out;
    shapes.push_back(s);
  }
  return shapes;
}

void check_classifier_inputs(const ModelSpec& spec,
                             std::span<const double> params,
                             SampleView samples) {
  if (spec.tag == ModelTag::Quadratic) {
    throw ValidationError("quadratic models are evaluated through a QuadraticTask");
  }
  if (params.size() != spec.num_params()) {
    throw ValidationError("params: expected " + std::to_string(spec.num_params()) +
                          " entries, got " + std::to_string(params.size()));
  }
  if (samples.data == nullptr) throw ValidationError("no dataset given");
  if (samples.data->feature_dim != spec.input_dim()) {
    throw ValidationError("dataset feature dim " +
                          std::to_string(samples.data->feature_dim) +
                          " does not match model input " +
                          std::to_string(spec.input_dim()));
  }
  if (samples.indices.empty()) throw ValidationError("empty sample batch");
  for (std::size_t idx : samples.indices) {
    if (idx >= samples.data->size()) {
      throw ValidationError("sample index " + std::to_string(idx) +
                            " out of range");
    }
    const int y = samples.data->labels[idx];
    if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes()) {
      throw ValidationError("label out of range for model");
    }
  }
}

// Activations of every layer for a batch; acts[0] is the input, acts.back()
// holds logits.
struct Forward {
  std::vector<std::vector<double>> acts;
};

Forward forward(const std::vector<LayerShape>& shapes,
                std::span<const double> params, SampleView samples) {
  const std::size_t batch = samples.indices.size();
  Forward f;
  f.acts.resize(shapes.size() + 1);
  const std::size_t in_dim = shapes.front().in;
  f.acts[0].resize(batch * in_dim);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto x = samples.data->sample(samples.indices[b]);
    std::copy(x.begin(), x.end(), f.acts[0].begin() + b * in_dim);
  }
  std::vector<double> transposed;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    const bool hidden = l + 1 < shapes.size();
    const double* weights = params.data() + s.weight_offset;
    const double* bias = params.data() + s.bias_offset;
    const auto& in = f.acts[l];
    auto& out = f.acts[l + 1];
    out.resize(batch * s.out);
    // Column-major copy so each input contributes one contiguous axpy.
    transposed.resize(s.in * s.out);
    for (std::size_t o = 0; o < s.out; ++o) {
      for (std::size_t i = 0; i < s.in; ++i) transposed[i * s.out + o] = weights[o * s.in + i];
    }
    for (std::size_t b = 0; b < batch; ++b) {
      const double* a = in.data() + b * s.in;
      double* z = out.data() + b * s.out;
      std::copy(bias, bias + s.out, z);
      for (std::size_t i = 0; i < s.in; ++i) {
        if (a[i] == 0.0) continue;
        const double ai = a[i];
        const double* col = transposed.data() + i * s.out;
        for (std::size_t o = 0; o < s.out; ++o) z[o] += ai * col[o];
      }
      if (hidden) {
        for (std::size_t o = 0; o < s.out; ++o) z[o] = std::max(z[o], 0.0);
      }
    }
  }
  return f;
}

// In-place softmax over each row of logits; returns summed cross-entropy.
double softmax_cross_entropy(std::vector<double>& logits, std::size_t classes,
                             SampleView samples) {
  double total = 0.0;
  for (std::size_t b = 0; b < samples.indices.size(); ++b) {
    double* z = logits.data() + b * classes;
    const double zmax = *std::max_element(z, z + classes);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(z[c] - zmax);
    const double log_denom = std::log(denom) + zmax;
    const int y = samples.data->labels[samples.indices[b]];
    total += log_denom - z[y];
    for (std::size_t c = 0; c < classes; ++c) z[c] = std::exp(z[c] - log_denom);
  }
  return total;
}

}  // namespace

std::size_t ModelSpec::num_params() const {
  if (tag == ModelTag::Quadratic) return layers.empty() ? 0 : layers.front();
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    count += layers[l] * layers[l + 1] + layers[l + 1];
  }
  return count;
}

void validate(const ModelSpec& spec) {
  for (std::size_t w : spec.layers) {
    if (w == 0) throw ValidationError("model: layer widths must be positive");
  }
  switch (spec.tag) {
    case ModelTag::Quadratic:
      if (spec.layers.size() != 1) {
        throw ValidationError("quadratic model takes exactly one dimension");
      }
      break;
    case ModelTag::Logistic:
      if (spec.layers.size() != 2) {
        throw ValidationError("logistic model takes input-classes");
      }
      break;
    case ModelTag::MLP:
      if (spec.layers.size() < 3) {
        throw ValidationError("mlp needs at least one hidden layer");
      }
      break;
  }
  if (spec.tag != ModelTag::Quadratic && spec.layers.back() < 2) {
    throw ValidationError("classifier needs at least two classes");
  }
}

ModelSpec parse_model_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("model spec '" + std::string(text) +
                          "' must look like kind:w0-w1-...");
  }
  const std::string_view kind = text.substr(0, colon);
  ModelSpec spec;
  if (kind == "quadratic") {
    spec.tag = ModelTag::Quadratic;
  } else if (kind == "logistic") {
    spec.tag = ModelTag::Logistic;
  } else if (kind == "mlp") {
    spec.tag = ModelTag::MLP;
  } else {
    throw ValidationError("unknown model kind '" + std::string(kind) + "'");
  }
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto dash = rest.find('-');
    const std::string_view tok = rest.substr(0, dash);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw ValidationError("bad layer width '" + std::string(tok) + "'");
    }
    spec.layers.push_back(value);
    if (dash == std::string_view::npos) break;
    rest = rest.substr(dash + 1);
  }
  validate(spec);
  return spec;
}

std::string to_string(const ModelSpec& spec) {
  std::string out;
  switch (spec.tag) {
    case ModelTag::Quadratic: out = "quadratic:"; break;
    case ModelTag::Logistic: out = "logistic:"; break;
    case ModelTag::MLP: out = "mlp:"; break;
  }
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (l) out += '-';
    out += std::to_string(spec.layers[l]);
  }
  return out;
}

ModelSpec default_mlp() { return {ModelTag::MLP, {784, 200, 200, 10}}; }

LossGrad loss_and_grad(const ModelSpec& spec, std::span<const double> params,
                       SampleView samples) {
  check_classifier_inputs(spec, params, samples);
  const auto shapes = layer_shapes(spec);
  Forward f = forward(shapes, params, samples);
  const std::size_t batch = samples.indices.size();
  const std::size_t classes = spec.num_classes();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  auto& probs = f.acts.back();
  LossGrad out;
  out.loss = softmax_cross_entropy(probs, classes, samples) * inv_batch;
  out.grad.assign(params.size(), 0.0);

  // delta = dLoss/dLogits
  std::vector<double> delta = std::move(probs);
  for (std::size_t b = 0; b < batch; ++b) {
    delta[b * classes + samples.data->labels[samples.indices[b]]] -= 1.0;
  }
  for (double& d : delta) d *= inv_batch;

  std::vector<double> prev_delta, grad_t;
  for (std::size_t l = shapes.size(); l-- > 0;) {
    const LayerShape& s = shapes[l];
    const auto& a = f.acts[l];
    double* gw = out.grad.data() + s.weight_offset;
    double* gb = out.grad.data() + s.bias_offset;
    // Accumulate the weight gradient column-major, skipping zero activations.
    grad_t.assign(s.in * s.out, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* arow = a.data() + b * s.in;
      const double* d = delta.data() + b * s.out;
      for (std::size_t o = 0; o < s.out; ++o) gb[o] += d[o];
      for (std::size_t i = 0; i < s.in; ++i) {
        if (arow[i] == 0.0) continue;
        const double ai = arow[i];
        double* col = grad_t.data() + i * s.out;
        for (std::size_t o = 0; o < s.out; ++o) col[o] += ai * d[o];
      }
    }
    for (std::size_t o = 0; o < s.out; ++o) {
      for (std::size_t i = 0; i < s.in; ++i) gw[o * s.in + i] += grad_t[i * s.out + o];
    }
    if (l == 0) break;
    const double* weights = params.data() + s.weight_offset;
    prev_delta.assign(batch * s.in, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      double* pd = prev_delta.data() + b * s.in;
      for (std::size_t o = 0; o < s.out; ++o) {
        const double d = delta[b * s.out + o];
        if (d == 0.0) continue;
        const double* row = weights + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) pd[i] += d * row[i];
      }
      const double* arow = a.data() + b * s.in;
      for (std::size_t i = 0; i < s.in; ++i) {
        if (!(arow[i] > 0.0)) pd[i] = 0.0;  // ReLU'
      }
    }
    delta.swap(prev_delta);
  }
  return out;
}

double loss_only(const ModelSpec& spec, std::span<const double> params,
                 SampleView samples) {
  check_classifier_inputs(spec, params, samples);
  Forward f = forward(layer_shapes(spec), params, samples);
  return softmax_cross_entropy(f.acts.back(), spec.num_classes(), samples) /
         static_cast<double>(samples.indices.size());
}

LossGrad loss_and_grad(const QuadraticTask& task, std::size_t client,
                       std::span<const double> w) {
  if (client >= task.num_clients()) {
    throw ValidationError("quadratic: client index out of range");
  }
  if (w.size() != task.dim) {
    throw ValidationError("quadratic: params length " + std::to_string(w.size()) +
                          " != dim " + std::to_string(task.dim));
  }
  const ModelVector& a = task.curvature[client];
  const ModelVector& c = task.centers[client];
  LossGrad out;
  out.grad.resize(task.dim);
  for (std::size_t i = 0; i < task.dim; ++i) {
    const double d = w[i] - c[i];
    out.grad[i] = a[i] * d;
    out.loss += 0.5 * a[i] * d * d;
  }
  return out;
}

LossGrad global_loss_and_grad(const QuadraticTask& task,
                              std::span<const double> w) {
  LossGrad out;
  out.grad.assign(task.dim, 0.0);
  for (std::size_t m = 0; m < task.num_clients(); ++m) {
    const LossGrad local = loss_and_grad(task, m, w);
    out.loss += task.weights[m] * local.loss;
    axpy(task.weights[m], local.grad, out.grad);
  }
  return out;
}

ModelVector quadratic_optimum(const QuadraticTask& task) {
  ModelVector num(task.dim, 0.0);
  ModelVector den(task.dim, 0.0);
  for (std::size_t m = 0; m < task.num_clients(); ++m) {
    for (std::size_t i = 0; i < task.dim; ++i) {
      const double wa = task.weights[m] * task.curvature[m][i];
      num[i] += wa * task.centers[m][i];
      den[i] += wa;
    }
  }
  for (std::size_t i = 0; i < task.dim; ++i) num[i] /= den[i];
  return num;
}

ModelVector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_diff_grad: h must be positive");
  ModelVector probe(x.begin(), x.end());
  ModelVector grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

ModelVector finite_diff_grad(const ModelSpec& spec,
                             std::span<const double> params,
                             SampleView samples, double h) {
  return finite_diff_grad(
      [&](std::span<const double> p) { return loss_only(spec, p, samples); },
      params, h);
}

ModelVector finite_diff_grad(const QuadraticTask& task, std::size_t client,
                             std::span<const double> w, double h) {
  return finite_diff_grad(
      [&](std::span<const double> p) { return loss_and_grad(task, client, p).loss; },
      w, h);
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b)) /
         std::max(norm(b), std::numeric_limits<double>::min());
}

Evaluation evaluate(const ModelSpec& spec, std::span<const double> params,
                    const Dataset& test) {
  if (test.size() == 0) throw ValidationError("evaluate: empty test set");
  const auto shapes = layer_shapes(spec);
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> idx;
  double loss = 0.0;
  std::size_t correct = 0;
  const std::size_t classes = spec.num_classes();
  for (std::size_t start = 0; start < test.size(); start += kChunk) {
    const std::size_t end = std::min(test.size(), start + kChunk);
    idx.resize(end - start);
    for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
    SampleView view{&test, idx};
    check_classifier_inputs(spec, params, view);
    Forward f = forward(shapes, params, view);
    auto& logits = f.acts.back();
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const double* z = logits.data() + b * classes;
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c) {
        if (z[c] > z[best]) best = c;
      }
      if (static_cast<int>(best) == test.labels[idx[b]]) ++correct;
    }
    loss += softmax_cross_entropy(logits, classes, view);
  }
  const double n = static_cast<double>(test.size());
  return {loss / n, static_cast<double>(correct) / n};
}

ModelVector init_params(const ModelSpec& spec, Rng& rng) {
  validate(spec);
  ModelVector params(spec.num_params(), 0.0);
  if (spec.tag != ModelTag::MLP) return params;
  for (const LayerShape& s : layer_shapes(spec)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < s.in * s.out; ++i) {
      params[s.weight_offset + i] = dist(rng);
    }
  }
  return params;
}

}  // namespace fednga
