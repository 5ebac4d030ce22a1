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
#include <vector>

#include "fednga/models.hpp"

namespace fednga {

struct GradCheckResult {
  ModelSpec spec;
  double tolerance = 0.0;
  // Relative L2 error of the analytic gradient against central differences,
  // one entry per trial.
  std::vector<double> errors;
  double max_error = 0.0;
  bool passed = false;
};

// 1e-5 for the quadratic and logistic models, 1e-3 for the MLP (ReLU kinks).
double gradcheck_tolerance(ModelTag tag);

// Each trial draws fresh parameters and a fresh batch. Quadratic trials use a
// random task client and iterate; classifier trials use `batch` samples of a
// Gaussian-blob dataset. Models with more than `max_coords` parameters are
// compared on a random subset of that many coordinates.
GradCheckResult gradient_check(const ModelSpec& spec, std::size_t trials,
                               std::uint64_t seed, std::size_t batch = 8,
                               std::size_t max_coords = 2048);

}  // namespace fednga
