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
#include <vector>

#include "doctest.h"
#include "fednga/attacks.hpp"
#include "fednga/error.hpp"
#include "fednga/rng.hpp"
#include "fednga/vecmath.hpp"
#include "helpers.hpp"

using namespace fednga;

TEST_SUITE("attacks") {

TEST_CASE("sign_flip examples") {
  using U = std::vector<ModelVector>;
  CHECK(sign_flip(U{{1, 2}}) == ModelVector{-3, -6});
  CHECK(sign_flip(U{{1, 0}, {-1, 0}}) == ModelVector{0, 0});
  CHECK(sign_flip(U{{0.5, 0.5}, {0.5, 0.5}}) == ModelVector{-3, -3});
  CHECK_THROWS_AS((void)sign_flip(U{}), ValidationError);
  CHECK_THROWS_AS((void)sign_flip(U{{1}, {1, 2}}), ValidationError);
}

TEST_CASE("sign_flip is homogeneous") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    auto honest = testing::random_uploads(4, 3, rng);
    const ModelVector base = sign_flip(honest);
    const double c = 0.25 + trial;
    for (auto& v : honest) v = scaled(v, c);
    const ModelVector s = sign_flip(honest);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s[i] == doctest::Approx(c * base[i]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("gaussian_attack moments") {
  Rng rng(42);
  const std::size_t dim = 3;
  const std::size_t draws = 100000;
  std::vector<double> sum(dim, 0.0), sq(dim, 0.0);
  for (std::size_t k = 0; k < draws; ++k) {
    const ModelVector v = gaussian_attack(dim, rng);
    for (std::size_t i = 0; i < dim; ++i) {
      sum[i] += v[i];
      sq[i] += v[i] * v[i];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    const double mean = sum[i] / draws;
    const double var = sq[i] / draws - mean * mean;
    CHECK(std::abs(mean) < 0.15);
    CHECK(std::abs(var - 90.0) < 2.0);
  }
}

TEST_CASE("gaussian_attack replays under a fixed seed") {
  Rng a = make_rng(7, Stream::GaussianAttack, {3, 10});
  Rng b = make_rng(7, Stream::GaussianAttack, {3, 10});
  Rng c = make_rng(7, Stream::GaussianAttack, {4, 10});
  const ModelVector va = gaussian_attack(16, a);
  CHECK(va == gaussian_attack(16, b));
  CHECK(va != gaussian_attack(16, c));
  CHECK_THROWS_AS((void)gaussian_attack(0, a), ValidationError);
  CHECK_THROWS_AS((void)gaussian_attack(2, a, 0.0), ValidationError);
}

TEST_CASE("same_value examples") {
  CHECK(same_value(3) == ModelVector{1, 1, 1});
  CHECK(same_value(1) == ModelVector{1});
  CHECK(normalize(same_value(4)) == ModelVector{0.5, 0.5, 0.5, 0.5});
  CHECK_THROWS_AS((void)same_value(0), ValidationError);
}

TEST_CASE("attack names and validation") {
  for (AttackTag t : {AttackTag::None, AttackTag::SignFlip, AttackTag::Gaussian,
                      AttackTag::SameValue}) {
    CHECK(parse_attack(to_string(t)) == t);
  }
  CHECK_THROWS_AS((void)parse_attack("label_flip"), ValidationError);
  AttackKind k{AttackTag::Gaussian, -1.0};
  CHECK_THROWS_AS(validate(k), ValidationError);
  k.gaussian_variance = 90.0;
  CHECK_NOTHROW(validate(k));
}

}  // TEST_SUITE
