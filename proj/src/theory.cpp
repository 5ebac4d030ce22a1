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


#include "fednga/theory.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fednga/error.hpp"

namespace fednga {

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::Constant ? "constant" : "polynomial";
}

ScheduleKind parse_schedule(std::string_view name) {
  if (name == "constant") return ScheduleKind::Constant;
  if (name == "polynomial") return ScheduleKind::Polynomial;
  throw ValidationError("unknown schedule '" + std::string(name) + "'");
}

void validate(const Schedule& schedule) {
  if (!(schedule.eta0 > 0.0) || !std::isfinite(schedule.eta0)) {
    throw ValidationError("eta0 must be positive");
  }
  if (schedule.kind == ScheduleKind::Polynomial &&
      !(schedule.delta > 0.0 && schedule.delta < 0.5)) {
    throw ValidationError("delta must lie in (0, 0.5) for the polynomial schedule");
  }
}

double lr_schedule(ScheduleKind kind, double eta0, double delta, std::size_t t) {
  return lr_schedule(Schedule{kind, eta0, delta}, t);
}

double lr_schedule(const Schedule& schedule, std::size_t t) {
  validate(schedule);
  if (schedule.kind == ScheduleKind::Constant) return schedule.eta0;
  return schedule.eta0 /
         std::pow(static_cast<double>(t) + 1.0, 0.5 + schedule.delta);
}

ThetaMeasurement measure_theta(std::span<const ModelVector> honest_grads,
                               std::span<const double> global_grad, double eps) {
  ThetaMeasurement out;
  out.per_client.assign(honest_grads.size(),
                        std::numeric_limits<double>::quiet_NaN());
  const double global_norm = norm(global_grad);
  if (global_norm < eps) return out;
  for (std::size_t m = 0; m < honest_grads.size(); ++m) {
    const auto& g = honest_grads[m];
    if (g.size() != global_grad.size()) {
      throw ValidationError("measure_theta: length mismatch");
    }
    const double n = norm(g);
    if (n < eps) continue;
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = g[i] / n - global_grad[i] / global_norm;
      acc += d * d;
    }
    const double theta = std::sqrt(acc);
    out.per_client[m] = theta;
    out.theta_max = out.measurable ? std::max(out.theta_max, theta) : theta;
    out.measurable = true;
  }
  return out;
}

double compute_gamma(double mu, double L, double theta, double c_alpha, double G) {
  if (!(G > 0.0)) throw ValidationError("compute_gamma: G must be positive");
  return 2.0 * ((mu + L - L * theta) * c_alpha - L) / G;
}

double descent_coefficient(double theta, double c_alpha) {
  return (2.0 - theta * theta / 2.0) * c_alpha - 1.0;
}

BoundCheck theorem1_check(std::span<const double> etas,
                          std::span<const double> grad_norms, double loss_first,
                          double loss_last, double L, double theta,
                          double c_alpha) {
  if (etas.size() != grad_norms.size() || etas.empty()) {
    throw ValidationError("theorem1_check: need matching, non-empty sequences");
  }
  BoundCheck out;
  const double k = descent_coefficient(theta, c_alpha);
  if (!(k > 0.0)) return out;
  out.applicable = true;
  double sum_eta = 0.0;
  double sum_eta_sq = 0.0;
  double weighted = 0.0;
  for (std::size_t t = 0; t < etas.size(); ++t) {
    sum_eta += etas[t];
    sum_eta_sq += etas[t] * etas[t];
    weighted += etas[t] * grad_norms[t];
  }
  out.lhs = weighted / sum_eta;
  out.rhs = (loss_first - loss_last) / (k * sum_eta) +
            L * sum_eta_sq / (2.0 * k * sum_eta);
  out.holds = out.lhs <= out.rhs + kBoundTolerance;
  return out;
}

bool lemma1_check(double gap_t, double gap_next, double eta_t, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("lemma1_check: gamma must be > 0");
  if (!(eta_t < 1.0 / gamma)) {
    throw ValidationError("lemma1_check: need eta < 1/gamma");
  }
  return gap_next <= (1.0 - gamma * eta_t) * gap_t + eta_t * eta_t + kBoundTolerance;
}

Theorem2Result theorem2_bounds(std::span<const double> etas,
                               std::span<const double> gaps, double gap0,
                               double gamma) {
  if (etas.size() != gaps.size() || etas.size() < 2) {
    throw ValidationError("theorem2_bounds: need T + 1 >= 2 matching entries");
  }
  Theorem2Result out;
  if (!(gamma > 0.0)) return out;
  for (double eta : etas) {
    if (!(eta < 1.0 / gamma)) return out;
  }
  const std::size_t T = etas.size() - 1;

  // prod_{t<T}(1 - gamma eta_t) gap0 + sum_{t<=T-2} eta_t^2 prod_{t<i<T}(...)
  // + eta_{T-1}^2, accumulated as the unrolled one-step recursion.
  double bound = gap0;
  for (std::size_t t = 0; t < T; ++t) {
    bound = (1.0 - gamma * etas[t]) * bound + etas[t] * etas[t];
  }
  out.final_gap.applicable = true;
  out.final_gap.lhs = gaps[T];
  out.final_gap.rhs = bound;
  out.final_gap.holds = gaps[T] <= bound + kBoundTolerance;

  double sum_eta = 0.0;
  double weighted = 0.0;
  double sum_eta_sq = 0.0;
  for (std::size_t t = 0; t <= T; ++t) {
    sum_eta += etas[t];
    weighted += etas[t] * gaps[t];
    if (t < T) sum_eta_sq += etas[t] * etas[t];
  }
  out.average_gap.applicable = true;
  out.average_gap.lhs = weighted / sum_eta;
  out.average_gap.rhs = gap0 / (gamma * sum_eta) + sum_eta_sq / (gamma * sum_eta);
  out.average_gap.holds = out.average_gap.lhs <= out.average_gap.rhs + kBoundTolerance;
  return out;
}

}  // namespace fednga
