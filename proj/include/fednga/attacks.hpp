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

#include "fednga/rng.hpp"
#include "fednga/vecmath.hpp"

namespace fednga {

enum class AttackTag { None, SignFlip, Gaussian, SameValue };

std::string_view to_string(AttackTag tag);
AttackTag parse_attack(std::string_view name);

inline constexpr double kDefaultGaussianVariance = 90.0;

struct AttackKind {
  AttackTag tag = AttackTag::None;
  double gaussian_variance = kDefaultGaussianVariance;

  bool operator==(const AttackKind&) const = default;
};

void validate(const AttackKind& kind);

// -3 * (unweighted sum of the honest uploads). Every Byzantine client sends
// the same vector in a round.
ModelVector sign_flip(std::span<const ModelVector> honest_uploads);

// Each coordinate i.i.d. N(0, variance). The caller supplies a stream that
// is exclusive to one Byzantine client in one round.
ModelVector gaussian_attack(std::size_t dim, Rng& rng,
                            double variance = kDefaultGaussianVariance);

// All-ones vector.
ModelVector same_value(std::size_t dim);

}  // namespace fednga
