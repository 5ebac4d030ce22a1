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
#include <span>
#include <string_view>
#include <vector>

#include "fednga/vecmath.hpp"

namespace fednga {

enum class ScheduleKind { Constant, Polynomial };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule(std::string_view name);

// Constant: eta0. Polynomial: eta0 / (t + 1)^(1/2 + delta), delta in (0, 1/2).
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double eta0 = 0.02;
  double delta = 0.1;

  bool operator==(const Schedule&) const = default;
};

void validate(const Schedule& schedule);
double lr_schedule(ScheduleKind kind, double eta0, double delta, std::size_t t);
double lr_schedule(const Schedule& schedule, std::size_t t);

struct ThetaMeasurement {
  bool measurable = false;
  double theta_max = 0.0;
  // || g_m/||g_m|| - g/||g|| || per honest client; NaN where ||g_m|| < eps.
  std::vector<double> per_client;
};

// Directional heterogeneity of the honest gradients against the global one.
// A global gradient shorter than eps makes the round unmeasurable.
ThetaMeasurement measure_theta(std::span<const ModelVector> honest_grads,
                               std::span<const double> global_grad,
                               double eps = kDefaultNormalizeEps);

// 2((mu + L - L*theta) C_alpha - L) / G. Callers check the sign.
double compute_gamma(double mu, double L, double theta, double c_alpha, double G);

// (2 - theta^2/2) C_alpha - 1; the non-convex rate needs this positive.
double descent_coefficient(double theta, double c_alpha);

// Absolute slack on every bound comparison.
inline constexpr double kBoundTolerance = 1e-9;

struct BoundCheck {
  bool applicable = false;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Non-convex rate. etas and grad_norms cover t = 0..T-1:
//   sum eta_t ||grad F(w^t)|| / sum eta_t
//     <= (F(w^0) - F(w^T)) / (k sum eta_t) + L sum eta_t^2 / (2 k sum eta_t)
// with k = descent_coefficient(theta, c_alpha). Not applicable when k <= 0.
BoundCheck theorem1_check(std::span<const double> etas,
                          std::span<const double> grad_norms, double loss_first,
                          double loss_last, double L, double theta,
                          double c_alpha);

// ||w^{t+1} - w*||^2 <= (1 - gamma eta) ||w^t - w*||^2 + eta^2 (+ tolerance).
// Throws ValidationError unless gamma > 0 and eta < 1/gamma.
bool lemma1_check(double gap_t, double gap_next, double eta_t, double gamma);

struct Theorem2Result {
  BoundCheck final_gap;    // ||w^T - w*||^2 against the product bound
  BoundCheck average_gap;  // eta-weighted mean gap over t = 0..T
};

// Strongly convex rates. etas and gaps cover t = 0..T (T + 1 entries), gap0
// is ||w^0 - w*||^2. Not applicable unless gamma > 0 and every eta < 1/gamma.
Theorem2Result theorem2_bounds(std::span<const double> etas,
                               std::span<const double> gaps, double gap0,
                               double gamma);

}  // namespace fednga
