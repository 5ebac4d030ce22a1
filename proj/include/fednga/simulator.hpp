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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fednga/aggregation.hpp"
#include "fednga/attacks.hpp"
#include "fednga/data.hpp"
#include "fednga/models.hpp"
#include "fednga/theory.hpp"

namespace fednga {

enum class DataSource { Synthetic, Mnist };

struct SimConfig {
  ModelTag task = ModelTag::Quadratic;

  // Quadratic task. quadratic.num_clients is overwritten by num_clients.
  QuadraticTaskParams quadratic{};
  // Multiplies every local loss (ablation of positive-scale invariance).
  double loss_scale = 1.0;

  // Classification tasks. Input and output widths come from the data.
  std::vector<std::size_t> hidden_layers{200, 200};
  DataSource data = DataSource::Synthetic;
  std::string mnist_images;
  std::string mnist_labels;
  std::string mnist_test_images;
  std::string mnist_test_labels;
  std::size_t train_samples = 2000;
  std::size_t test_samples = 1000;
  std::size_t synth_dim = 20;
  std::size_t synth_classes = 4;
  double synth_separation = 1.0;

  std::size_t num_clients = 100;
  AttackKind attack{};
  double c_alpha_bar = 0.0;
  double beta = 0.6;
  AggregatorKind aggregator{};
  // Krum's assumed Byzantine count follows the selected set unless set.
  std::optional<std::size_t> krum_b{};
  Schedule schedule{};
  std::size_t rounds = 10000;
  // 0 = full local shard; otherwise min(batch, S_m) samples per round.
  std::size_t batch = 512;
  std::uint64_t seed = 0;
  // Classification telemetry (loss, gradient norm, theta, accuracy) cadence.
  std::size_t eval_every = 10;
  // Fill agg_time_ns. Wall-clock times make the records CSV differ between
  // otherwise identical runs.
  bool record_timing = false;
  std::size_t threads = 1;

  bool operator==(const SimConfig&) const = default;
};

// Throws ValidationError naming the offending field.
void validate(const SimConfig& config);

struct RoundRecord {
  std::size_t t = 0;
  double eta = 0.0;
  std::optional<double> loss;
  std::optional<double> grad_norm;
  std::optional<double> gap;
  std::optional<double> theta_max;
  std::optional<double> accuracy;
  std::optional<std::int64_t> agg_time_ns;
  // Not serialized.
  std::optional<double> max_local_grad_norm;
  // gamma from the running L, mu, G, theta after this round's telemetry.
  std::optional<double> running_gamma;
  std::size_t degenerate_uploads = 0;
};

// Constants of the convergence bounds as witnessed so far by a run.
struct TheoryParams {
  double L = 0.0;   // exact for the quadratic task, NaN otherwise
  double mu = 0.0;  // exact for the quadratic task, NaN otherwise
  double G = 0.0;   // 1.01 * running max of full-batch ||grad F_m||
  double theta = 0.0;  // running max of theta_m over honest clients
  bool theta_measured = false;
  double c_alpha = 1.0;
  double gamma = 0.0;  // NaN when undefined

  void refresh_gamma();
};

inline constexpr double kGradientBoundMargin = 1.01;

class Simulation {
 public:
  explicit Simulation(SimConfig config);
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  const SimConfig& config() const noexcept;
  std::size_t round() const noexcept;
  std::span<const double> params() const noexcept;
  std::span<const double> weights() const noexcept;
  const ByzantineSelection& byzantine() const noexcept;
  const TheoryParams& theory() const noexcept;
  const std::optional<ModelVector>& optimum() const noexcept;
  const std::optional<QuadraticTask>& quadratic_task() const noexcept;

  // One round: honest gradients, attack uploads, aggregation and the
  // update w <- w - eta^t * aggregate. Returns telemetry for w^t.
  RoundRecord step();

  // Telemetry at the current iterate without updating it.
  RoundRecord observe();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SimulationResult {
  // t = 0..T; the last entry describes the final iterate w^T.
  std::vector<RoundRecord> records;
  TheoryParams theory{};
  ModelVector final_params;
  std::optional<ModelVector> optimum;
  ByzantineSelection byzantine;
  // min_t ||grad F(w^t)|| over measured rounds.
  std::optional<double> min_grad_norm;
};

SimulationResult run_simulation(const SimConfig& config);

// Theorem-style checks over a finished run.
BoundCheck theorem1_check(std::span<const RoundRecord> records, double L,
                          double theta, double c_alpha);
Theorem2Result theorem2_bounds(std::span<const RoundRecord> records,
                               double gamma);

struct LemmaReport {
  bool applicable = false;
  std::size_t steps_checked = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation;
  double worst_slack = 0.0;  // max of gap_next - bound
};

// Per-step contraction check over consecutive records with a fixed gamma.
LemmaReport lemma1_report(std::span<const RoundRecord> records, double gamma);
// Same, with step t checked against records[t].running_gamma, i.e. the
// constants witnessed up to round t.
LemmaReport lemma1_report_running(std::span<const RoundRecord> records);

struct GammaCalibration {
  bool ok = false;
  double gamma = 0.0;
  double eta = 0.0;
  int passes = 0;
  SimulationResult run;
};

// Finds a constant step eta with eta * gamma = fraction (within 5%), where
// gamma comes from the constants witnessed on the run that uses that very
// step. Brackets on a doubling grid, then bisects in log space. On success
// `run` is the accepted run and `gamma` its witnessed value.
GammaCalibration calibrate_constant_step(SimConfig config, double fraction,
                                         int max_passes = 40);

// Worker count after the FEDNGA_THREADS cap.
std::size_t effective_threads(std::size_t requested);

}  // namespace fednga
