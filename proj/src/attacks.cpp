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


#include "fednga/attacks.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fednga/error.hpp"

namespace fednga {

std::string_view to_string(AttackTag tag) {
  switch (tag) {
    case AttackTag::None: return "none";
    case AttackTag::SignFlip: return "sign_flip";
    case AttackTag::Gaussian: return "gaussian";
    case AttackTag::SameValue: return "same_value";
  }
  return "unknown";
}

AttackTag parse_attack(std::string_view name) {
  for (AttackTag t : {AttackTag::None, AttackTag::SignFlip, AttackTag::Gaussian,
                      AttackTag::SameValue}) {
    if (to_string(t) == name) return t;
  }
  throw ValidationError("unknown attack '" + std::string(name) + "'");
}

void validate(const AttackKind& kind) {
  if (kind.tag == AttackTag::Gaussian &&
      !(kind.gaussian_variance > 0.0 && std::isfinite(kind.gaussian_variance))) {
    throw ValidationError("gaussian attack: variance must be positive");
  }
}

ModelVector sign_flip(std::span<const ModelVector> honest_uploads) {
  if (honest_uploads.empty()) {
    throw ValidationError("sign_flip: no honest uploads to flip");
  }
  const std::size_t p = honest_uploads.front().size();
  ModelVector out(p, 0.0);
  for (const auto& g : honest_uploads) {
    if (g.size() != p) throw ValidationError("sign_flip: length mismatch");
    for (std::size_t i = 0; i < p; ++i) out[i] += g[i];
  }
  for (double& x : out) x *= -3.0;
  return out;
}

ModelVector gaussian_attack(std::size_t dim, Rng& rng, double variance) {
  if (dim == 0) throw ValidationError("gaussian_attack: dim must be >= 1");
  if (!(variance > 0.0)) {
    throw ValidationError("gaussian_attack: variance must be positive");
  }
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  ModelVector out(dim);
  for (double& x : out) x = dist(rng);
  return out;
}

ModelVector same_value(std::size_t dim) {
  if (dim == 0) throw ValidationError("same_value: dim must be >= 1");
  return ModelVector(dim, 1.0);
}

}  // namespace fednga
