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


#include "fednga/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "fednga/error.hpp"

namespace fednga {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t n = std::min(threads, count);
  for (std::size_t k = 0; k + 1 < n; ++k) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

void check_finite(std::span<const double> v, std::size_t round,
                  const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NonFiniteError("round " + std::to_string(round) + ": " + what +
                               " has a non-finite entry at index " +
                               std::to_string(i),
                           i);
    }
  }
}

void check_scalar(double v, std::size_t round, const std::string& what) {
  if (!std::isfinite(v)) {
    throw NonFiniteError("round " + std::to_string(round) + ": " + what + " is non-finite", 0);
  }
}

}  // namespace

std::size_t effective_threads(std::size_t requested) {
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("FEDNGA_THREADS")) {
    const long value = std::strtol(cap, nullptr, 10);
    if (value >= 1) requested = std::min<std::size_t>(requested, value);
  }
  return std::max<std::size_t>(requested, 1);
}

void TheoryParams::refresh_gamma() {
  if (std::isfinite(mu) && std::isfinite(L) && theta_measured && G > 0.0) {
    gamma = compute_gamma(mu, L, theta, c_alpha, G);
  } else {
    gamma = kNaN;
  }
}

void validate(const SimConfig& c) {
  if (c.num_clients == 0) throw ValidationError("M: must be >= 1");
  if (c.rounds == 0) throw ValidationError("T: must be >= 1");
  if (!(c.c_alpha_bar >= 0.0 && c.c_alpha_bar < 0.5)) {
    throw ValidationError("c_alpha_bar: must lie in [0, 0.5)");
  }
  if (c.attack.tag == AttackTag::None && c.c_alpha_bar > 0.0) {
    throw ValidationError("c_alpha_bar: must be 0 when attack=none");
  }
  if (!(c.loss_scale > 0.0) || !std::isfinite(c.loss_scale)) {
    throw ValidationError("loss_scale: must be positive");
  }
  try {
    validate(c.schedule);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("schedule: ") + e.what());
  }
  try {
    validate(c.attack);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("gaussian_variance: ") + e.what());
  }
  if (c.task == ModelTag::Quadratic) {
    if (c.quadratic.dim == 0) throw ValidationError("dim: must be >= 1");
    if (!(c.quadratic.mu > 0.0)) throw ValidationError("mu: must be > 0");
    if (!(c.quadratic.L >= c.quadratic.mu)) throw ValidationError("L: must be >= mu");
    if (!(c.quadratic.center_spread >= 0.0)) {
      throw ValidationError("center_spread: must be >= 0");
    }
  } else {
    if (!(c.beta > 0.0)) throw ValidationError("beta: must be > 0");
    if (c.eval_every == 0) throw ValidationError("eval_every: must be >= 1");
    if (c.train_samples < c.num_clients) {
      throw ValidationError("train_samples: fewer samples than clients");
    }
    if (c.test_samples == 0) throw ValidationError("test_samples: must be >= 1");
    if (c.task == ModelTag::MLP && c.hidden_layers.empty()) {
      throw ValidationError("layers: mlp needs at least one hidden layer");
    }
    for (std::size_t h : c.hidden_layers) {
      if (h == 0) throw ValidationError("layers: widths must be positive");
    }
    if (c.data == DataSource::Mnist) {
      if (c.mnist_images.empty()) throw ValidationError("mnist_images: required for data=mnist");
      if (c.mnist_labels.empty()) throw ValidationError("mnist_labels: required for data=mnist");
      if (c.mnist_test_images.empty()) {
        throw ValidationError("mnist_test_images: required for data=mnist");
      }
      if (c.mnist_test_labels.empty()) {
        throw ValidationError("mnist_test_labels: required for data=mnist");
      }
    } else if (c.synth_dim == 0 || c.synth_classes < 2) {
      throw ValidationError("synth_classes: need synth_dim >= 1 and >= 2 classes");
    }
  }
  const auto& agg = c.aggregator;
  if (agg.tag == AggregatorTag::TrimmedMean && 2 * agg.trim_k >= c.num_clients) {
    throw ValidationError("trim_k: need 2 * trim_k < M");
  }
  if (agg.tag == AggregatorTag::GeomMedian &&
      (!(agg.weiszfeld.tol > 0.0) || agg.weiszfeld.max_iter < 1 ||
       !(agg.weiszfeld.smoothing > 0.0))) {
    throw ValidationError("gm_tol: Weiszfeld options must be positive");
  }
}

struct Simulation::Impl {
  SimConfig config;
  std::size_t threads = 1;
  bool full_batch = true;

  std::optional<QuadraticTask> task;
  ModelSpec spec;
  Dataset train;
  Dataset test;
  std::vector<Shard> shards;

  std::vector<double> weights;
  ByzantineSelection byzantine;
  std::vector<char> is_byzantine;
  std::vector<std::size_t> honest;
  AggregatorKind aggregator;

  ModelVector w;
  std::optional<ModelVector> optimum;
  TheoryParams theory;
  std::size_t t = 0;

  explicit Impl(SimConfig cfg) : config(std::move(cfg)) {
    validate(config);
    threads = effective_threads(config.threads);
    const std::uint64_t seed = config.seed;

    if (config.task == ModelTag::Quadratic) {
      QuadraticTaskParams params = config.quadratic;
      params.num_clients = config.num_clients;
      Rng rng = make_rng(seed, Stream::Task);
      QuadraticTask base = gen_quadratic_task(params, rng);
      optimum = quadratic_optimum(base);
      task = config.loss_scale == 1.0 ? std::move(base)
                                      : scale_losses(base, config.loss_scale);
      spec = {ModelTag::Quadratic, {params.dim}};
      weights = task->weights;
      theory.L = task->L;
      theory.mu = task->mu;
      full_batch = true;
    } else {
      load_data();
      spec.tag = config.task;
      spec.layers.push_back(train.feature_dim);
      if (config.task == ModelTag::MLP) {
        spec.layers.insert(spec.layers.end(), config.hidden_layers.begin(),
                           config.hidden_layers.end());
      }
      spec.layers.push_back(train.num_classes);
      validate(spec);
      Rng part = make_rng(seed, Stream::Partition);
      shards = dirichlet_partition(train.labels, config.num_clients, config.beta, part);
      weights = shard_weights(shards);
      theory.L = kNaN;
      theory.mu = kNaN;
      full_batch = config.batch == 0;
    }

    is_byzantine.assign(config.num_clients, 0);
    if (config.attack.tag != AttackTag::None) {
      Rng rng = make_rng(seed, Stream::Byzantine);
      byzantine = select_byzantine(weights, config.c_alpha_bar, rng);
      for (std::size_t m : byzantine.clients) is_byzantine[m] = 1;
    }
    for (std::size_t m = 0; m < config.num_clients; ++m) {
      if (!is_byzantine[m]) honest.push_back(m);
    }
    if (honest.empty()) throw ValidationError("c_alpha_bar: no honest clients left");
    theory.c_alpha = 1.0 - byzantine.achieved;
    theory.gamma = kNaN;

    aggregator = config.aggregator;
    aggregator.krum_b = config.krum_b.value_or(byzantine.clients.size());
    if (aggregator.tag == AggregatorTag::Krum &&
        config.num_clients < aggregator.krum_b + 3) {
      throw ValidationError("krum_b: need M - b - 2 >= 1");
    }

    Rng init = make_rng(seed, Stream::ModelInit);
    w = init_params(spec, init);
  }

  void load_data() {
    Dataset all;
    if (config.data == DataSource::Mnist) {
      train = load_mnist_idx(config.mnist_images, config.mnist_labels,
                             config.train_samples);
      test = load_mnist_idx(config.mnist_test_images, config.mnist_test_labels,
                            config.test_samples);
    } else {
      Rng rng = make_rng(config.seed, Stream::Dataset);
      all = make_gaussian_blobs(config.train_samples + config.test_samples,
                                config.synth_dim, config.synth_classes,
                                config.synth_separation, rng);
      train = prefix(all, config.train_samples);
      test.feature_dim = all.feature_dim;
      test.num_classes = all.num_classes;
      test.labels.assign(all.labels.begin() + config.train_samples, all.labels.end());
      test.features.assign(all.features.begin() + config.train_samples * all.feature_dim,
                           all.features.end());
    }
    validate(train);
    validate(test);
    if (train.size() < config.num_clients) {
      throw ValidationError("train_samples: fewer samples than clients");
    }
  }

  bool telemetry_round(std::size_t round) const {
    return task.has_value() || round % config.eval_every == 0 ||
           round == config.rounds;
  }

  LossGrad full_local(std::size_t m) const {
    if (task) return loss_and_grad(*task, m, w);
    LossGrad lg = loss_and_grad(spec, w, {&train, shards[m].indices});
    if (config.loss_scale != 1.0) {
      lg.loss *= config.loss_scale;
      for (double& g : lg.grad) g *= config.loss_scale;
    }
    return lg;
  }

  ModelVector minibatch_grad(std::size_t m) const {
    const auto& idx = shards[m].indices;
    if (config.batch >= idx.size()) return full_local(m).grad;
    std::vector<std::size_t> picked;
    picked.reserve(config.batch);
    Rng rng = make_rng(config.seed, Stream::Minibatch, {m, t});
    std::sample(idx.begin(), idx.end(), std::back_inserter(picked), config.batch, rng);
    LossGrad lg = loss_and_grad(spec, w, {&train, picked});
    if (config.loss_scale != 1.0) {
      for (double& g : lg.grad) g *= config.loss_scale;
    }
    return std::move(lg.grad);
  }

  std::vector<LossGrad> full_all() const {
    std::vector<LossGrad> out(config.num_clients);
    parallel_for(config.num_clients, threads,
                 [&](std::size_t m) { out[m] = full_local(m); });
    return out;
  }

  // Global loss/gradient over every client's data, theta over honest clients,
  // and the running theory constants.
  void fill_telemetry(RoundRecord& rec, const std::vector<LossGrad>& full) {
    ModelVector global(w.size(), 0.0);
    double loss = 0.0;
    double max_local = 0.0;
    for (std::size_t m = 0; m < full.size(); ++m) {
      loss += weights[m] * full[m].loss;
      axpy(weights[m], full[m].grad, global);
      max_local = std::max(max_local, norm(full[m].grad));
    }
    rec.loss = loss;
    rec.grad_norm = norm(global);
    rec.max_local_grad_norm = max_local;
    if (optimum) rec.gap = squared_distance(w, *optimum);
    check_scalar(loss, t, "global loss");
    check_scalar(*rec.grad_norm, t, "global gradient norm");
    if (rec.gap) check_scalar(*rec.gap, t, "optimality gap");

    std::vector<ModelVector> honest_grads;
    honest_grads.reserve(honest.size());
    for (std::size_t m : honest) honest_grads.push_back(full[m].grad);
    const ThetaMeasurement theta = measure_theta(honest_grads, global);
    if (theta.measurable) {
      rec.theta_max = theta.theta_max;
      theory.theta = theory.theta_measured ? std::max(theory.theta, theta.theta_max)
                                           : theta.theta_max;
      theory.theta_measured = true;
    }
    theory.G = std::max(theory.G, kGradientBoundMargin * max_local);
    theory.refresh_gamma();
    rec.running_gamma = theory.gamma;

    if (!task) rec.accuracy = evaluate(spec, w, test).accuracy;
  }

  RoundRecord step() {
    RoundRecord rec;
    rec.t = t;
    rec.eta = lr_schedule(config.schedule, t);
    const std::size_t count = config.num_clients;
    const bool measure = telemetry_round(t);

    std::vector<ModelVector> uploads(count);
    std::vector<LossGrad> full;
    if (measure) {
      full = full_all();
      fill_telemetry(rec, full);
    }
    if (full_batch && measure) {
      for (std::size_t m : honest) uploads[m] = full[m].grad;
    } else {
      parallel_for(honest.size(), threads, [&](std::size_t k) {
        const std::size_t m = honest[k];
        uploads[m] = full_batch ? full_local(m).grad : minibatch_grad(m);
      });
    }
    for (std::size_t m : honest) {
      check_finite(uploads[m], t, "honest gradient of client " + std::to_string(m));
    }

    if (!byzantine.clients.empty()) {
      ModelVector shared;
      if (config.attack.tag == AttackTag::SignFlip) {
        std::vector<ModelVector> honest_uploads;
        honest_uploads.reserve(honest.size());
        for (std::size_t m : honest) honest_uploads.push_back(uploads[m]);
        shared = sign_flip(honest_uploads);
      } else if (config.attack.tag == AttackTag::SameValue) {
        shared = same_value(w.size());
      }
      for (std::size_t m : byzantine.clients) {
        if (config.attack.tag == AttackTag::Gaussian) {
          Rng rng = make_rng(config.seed, Stream::GaussianAttack, {m, t});
          uploads[m] = gaussian_attack(w.size(), rng, config.attack.gaussian_variance);
        } else {
          uploads[m] = shared;
        }
        check_finite(uploads[m], t, "byzantine upload of client " + std::to_string(m));
      }
    }

    for (const auto& u : uploads) {
      if (is_degenerate(u)) ++rec.degenerate_uploads;
    }

    const auto start = std::chrono::steady_clock::now();
    const ModelVector agg = aggregate(aggregator, uploads, weights);
    const auto stop = std::chrono::steady_clock::now();
    if (config.record_timing) {
      rec.agg_time_ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
    }

    check_finite(agg, t, "aggregate");
    axpy(-rec.eta, agg, w);
    check_finite(w, t, "updated parameters");
    ++t;
    return rec;
  }

  RoundRecord observe() {
    RoundRecord rec;
    rec.t = t;
    rec.eta = lr_schedule(config.schedule, t);
    fill_telemetry(rec, full_all());
    return rec;
  }
};

Simulation::Simulation(SimConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

const SimConfig& Simulation::config() const noexcept { return impl_->config; }
std::size_t Simulation::round() const noexcept { return impl_->t; }
std::span<const double> Simulation::params() const noexcept { return impl_->w; }
std::span<const double> Simulation::weights() const noexcept { return impl_->weights; }
const ByzantineSelection& Simulation::byzantine() const noexcept {
  return impl_->byzantine;
}
const TheoryParams& Simulation::theory() const noexcept { return impl_->theory; }
const std::optional<ModelVector>& Simulation::optimum() const noexcept {
  return impl_->optimum;
}
const std::optional<QuadraticTask>& Simulation::quadratic_task() const noexcept {
  return impl_->task;
}
RoundRecord Simulation::step() { return impl_->step(); }
RoundRecord Simulation::observe() { return impl_->observe(); }

SimulationResult run_simulation(const SimConfig& config) {
  Simulation sim(config);
  SimulationResult result;
  result.records.reserve(config.rounds + 1);
  for (std::size_t t = 0; t < config.rounds; ++t) result.records.push_back(sim.step());
  result.records.push_back(sim.observe());
  result.theory = sim.theory();
  result.final_params.assign(sim.params().begin(), sim.params().end());
  result.optimum = sim.optimum();
  result.byzantine = sim.byzantine();
  for (const auto& r : result.records) {
    if (r.grad_norm) {
      result.min_grad_norm = result.min_grad_norm
                                 ? std::min(*result.min_grad_norm, *r.grad_norm)
                                 : *r.grad_norm;
    }
  }
  return result;
}

BoundCheck theorem1_check(std::span<const RoundRecord> records, double L,
                          double theta, double c_alpha) {
  if (records.size() < 2) throw ValidationError("theorem1_check: need T >= 1");
  const std::size_t T = records.size() - 1;
  std::vector<double> etas(T), norms(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (!records[t].grad_norm) {
      throw ValidationError("theorem1_check: round " + std::to_string(t) +
                            " has no gradient norm");
    }
    etas[t] = records[t].eta;
    norms[t] = *records[t].grad_norm;
  }
  if (!records.front().loss || !records.back().loss) {
    throw ValidationError("theorem1_check: missing loss at w^0 or w^T");
  }
  return theorem1_check(etas, norms, *records.front().loss, *records.back().loss,
                        L, theta, c_alpha);
}

Theorem2Result theorem2_bounds(std::span<const RoundRecord> records,
                               double gamma) {
  std::vector<double> etas, gaps;
  for (const auto& r : records) {
    if (!r.gap) throw ValidationError("theorem2_bounds: optimality gap unknown");
    etas.push_back(r.eta);
    gaps.push_back(*r.gap);
  }
  return theorem2_bounds(etas, gaps, gaps.empty() ? 0.0 : gaps.front(), gamma);
}

namespace {

template <class GammaAt>
LemmaReport lemma1_scan(std::span<const RoundRecord> records, GammaAt gamma_at) {
  LemmaReport report;
  if (records.size() < 2) return report;
  for (std::size_t t = 0; t + 1 < records.size(); ++t) {
    const double gamma = gamma_at(t);
    if (!(gamma > 0.0) || !(records[t].eta < 1.0 / gamma) || !records[t].gap ||
        !records[t + 1].gap) {
      return report;
    }
  }
  report.applicable = true;
  report.worst_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < records.size(); ++t) {
    const double gamma = gamma_at(t);
    const double eta = records[t].eta;
    const double gap = *records[t].gap;
    const double next = *records[t + 1].gap;
    const double bound = (1.0 - gamma * eta) * gap + eta * eta;
    report.worst_slack = std::max(report.worst_slack, next - bound);
    ++report.steps_checked;
    if (!lemma1_check(gap, next, eta, gamma)) {
      ++report.violations;
      if (!report.first_violation) report.first_violation = t;
    }
  }
  return report;
}

}  // namespace

LemmaReport lemma1_report(std::span<const RoundRecord> records, double gamma) {
  return lemma1_scan(records, [gamma](std::size_t) { return gamma; });
}

LemmaReport lemma1_report_running(std::span<const RoundRecord> records) {
  for (const auto& r : records) {
    if (!r.running_gamma) return {};
  }
  return lemma1_scan(records, [&](std::size_t t) { return *records[t].running_gamma; });
}

GammaCalibration calibrate_constant_step(SimConfig config, double fraction,
                                         int max_passes) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("calibrate_constant_step: fraction must lie in (0, 1)");
  }
  if (max_passes < 2) {
    throw ValidationError("calibrate_constant_step: max_passes must be at least 2");
  }
  constexpr double kRelTol = 0.05;
  GammaCalibration cal;
  // h(eta) = eta * gamma(eta), where gamma comes from the run at that eta.
  auto probe = [&](double eta, SimulationResult& out) {
    config.schedule = {ScheduleKind::Constant, eta, config.schedule.delta};
    out = run_simulation(config);
    ++cal.passes;
    return out.theory.gamma > 0.0 ? eta * out.theory.gamma : -1.0;
  };
  auto accept = [&](double eta, double h, SimulationResult& run) {
    if (h <= 0.0 || std::abs(h / fraction - 1.0) > kRelTol) return false;
    cal.ok = true;
    cal.eta = eta;
    cal.gamma = run.theory.gamma;
    cal.run = std::move(run);
    return true;
  };

  SimulationResult run;
  if (!(probe(config.schedule.eta0, run) > 0.0)) {
    cal.run = std::move(run);
    return cal;
  }
  double eta = fraction / run.theory.gamma;
  double h = probe(eta, run);
  if (accept(eta, h, run)) return cal;

  // Bracket the target on a doubling grid, then bisect in log space.
  double lo = 0.0, hi = 0.0;
  if (h > 0.0 && h < fraction) lo = eta; else hi = eta;
  while (cal.passes < max_passes && (lo == 0.0 || hi == 0.0)) {
    eta = lo == 0.0 ? hi / 2.0 : lo * 2.0;
    h = probe(eta, run);
    if (accept(eta, h, run)) return cal;
    if (h > 0.0 && h < fraction) lo = eta; else hi = eta;
  }
  while (cal.passes < max_passes && lo > 0.0 && hi > 0.0) {
    eta = std::sqrt(lo * hi);
    h = probe(eta, run);
    if (accept(eta, h, run)) return cal;
    if (h > 0.0 && h < fraction) lo = eta; else hi = eta;
  }
  cal.run = std::move(run);
  return cal;
}

}  // namespace fednga
