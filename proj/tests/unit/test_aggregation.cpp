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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fednga/aggregation.hpp"
#include "fednga/error.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fednga;
using fednga::testing::equal_weights;
using fednga::testing::random_uploads;
using fednga::testing::random_weights;
using fednga::testing::uniform_int;

namespace {

using Uploads = std::vector<ModelVector>;
using Weights = std::vector<double>;

void check_close(const ModelVector& a, const ModelVector& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

template <class T>
std::vector<T> permuted(const std::vector<T>& v, const std::vector<std::size_t>& perm) {
  std::vector<T> out;
  for (std::size_t i : perm) out.push_back(v[i]);
  return out;
}

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("fed_nga examples") {
  CHECK(fed_nga(Uploads{{2, 0}, {0, 2}}, Weights{0.5, 0.5}) == ModelVector{0.5, 0.5});
  CHECK(fed_nga(Uploads{{7, 0}}, Weights{1.0}) == ModelVector{1, 0});
  CHECK(fed_nga(Uploads{{1, 0}, {-1, 0}}, Weights{0.5, 0.5}) == ModelVector{0, 0});
}

TEST_CASE("fed_nga hand-computed three clients") {
  // Directions (1,0), (0.6,0.8), (0,-1) with weights 0.5, 0.25, 0.25.
  const ModelVector g = fed_nga(Uploads{{2, 0}, {3, 4}, {0, -0.5}}, Weights{0.5, 0.25, 0.25});
  check_close(g, {0.5 + 0.15, 0.2 - 0.25}, 1e-15);
}

TEST_CASE("fed_nga degenerate uploads contribute nothing") {
  check_close(fed_nga(Uploads{{3, 4}, {0, 0}}, Weights{0.5, 0.5}), {0.3, 0.4}, 1e-16);
  CHECK(fed_nga(Uploads{{0, 0}}, Weights{1.0}) == ModelVector{0, 0});
}

TEST_CASE("weights are validated") {
  CHECK_THROWS_AS((void)fed_nga(Uploads{{1}, {2}}, Weights{0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS((void)fedavg(Uploads{{1}, {2}}, Weights{0.5}), ValidationError);
  CHECK_THROWS_AS((void)fed_nga(Uploads{{1}, {2}}, Weights{1.5, -0.5}), ValidationError);
  CHECK_THROWS_AS((void)fed_nga(Uploads{{1}, {2}}, Weights{1.0, 0.0}), ValidationError);
  CHECK_NOTHROW((void)fed_nga(Uploads{{1}, {2}}, Weights{0.5, 0.5 + 5e-10}));
  CHECK_THROWS_AS((void)fed_nga(Uploads{{1}, {2, 3}}, Weights{0.5, 0.5}), ValidationError);
}

TEST_CASE("fedavg examples") {
  CHECK(fedavg(Uploads{{2, 0}, {0, 2}}, Weights{0.5, 0.5}) == ModelVector{1, 1});
  CHECK(fedavg(Uploads{{5, 5}}, Weights{1.0}) == ModelVector{5, 5});
  CHECK(fedavg(Uploads{{4, 0}, {0, 0}}, Weights{0.25, 0.75}) == ModelVector{1, 0});
}

TEST_CASE("coordinate_median examples") {
  CHECK(coordinate_median(Uploads{{1, 5}, {2, 4}, {3, 3}}) == ModelVector{2, 4});
  CHECK(coordinate_median(Uploads{{0, 0}, {2, 2}}) == ModelVector{1, 1});
  CHECK_THROWS_AS((void)coordinate_median(Uploads{}), ValidationError);
  Rng rng(21);
  const Uploads u = random_uploads(5, 3, rng);
  CHECK(coordinate_median(u) == oracle::median(u));
}

TEST_CASE("trimmed_mean examples") {
  CHECK(trimmed_mean(Uploads{{0}, {1}, {2}, {100}}, 1) == ModelVector{1.5});
  Rng rng(22);
  const Uploads u = random_uploads(6, 3, rng);
  check_close(trimmed_mean(u, 0), fedavg(u, equal_weights(6)), 1e-14);
  Uploads scalars;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 7; ++i) scalars.push_back({n(rng)});
  CHECK(trimmed_mean(scalars, 2) == oracle::trimmed_mean(scalars, 2));
  CHECK_THROWS_AS((void)trimmed_mean(Uploads{{0}, {1}, {2}, {3}}, 2), ValidationError);
}

TEST_CASE("krum examples") {
  const Uploads line{{0}, {0.1}, {0.2}, {10}};
  const auto scores = oracle::krum_scores(line, 1);
  CHECK(scores[0] == doctest::Approx(0.01));
  CHECK(scores[1] == doctest::Approx(0.01));
  CHECK(scores[2] == doctest::Approx(0.01));
  CHECK(scores[3] == doctest::Approx(96.04));
  CHECK(krum_select(line, 1) == oracle::krum_index(line, 1));
  CHECK(krum(line, 1) == ModelVector{0});
  CHECK(krum_select(Uploads(5, ModelVector{1, 2}), 1) == 0);
  Rng rng(23);
  const Uploads u = random_uploads(6, 2, rng);
  CHECK(krum_select(u, 1) == oracle::krum_index(u, 1));
  CHECK_THROWS_AS((void)krum(Uploads{{0}, {1}, {2}}, 1), ValidationError);
  CHECK_NOTHROW((void)krum(Uploads{{0}, {1}, {2}}, 0));
}

TEST_CASE("geometric_median examples") {
  const auto single = geometric_median(Uploads{{1.5, -2}}, Weights{1.0});
  CHECK(single.point == ModelVector{1.5, -2});
  const double h = std::sqrt(3.0) / 2.0;
  const auto tri = geometric_median(Uploads{{1, 0}, {-0.5, h}, {-0.5, -h}}, equal_weights(3));
  check_close(tri.point, {0.0, 0.0}, 1e-10);
  Rng rng(24);
  for (int trial = 0; trial < 5; ++trial) {
    const Uploads u = random_uploads(4, 2, rng);
    const Weights w = equal_weights(4);
    const auto gm = geometric_median(u, w);
    const auto grid = oracle::gm_grid_search(u, w, 200, 2);
    CHECK(std::sqrt(oracle::sq_dist(gm.point, grid)) < 1e-3);
  }
}

TEST_CASE("geometric_median option validation") {
  CHECK_THROWS_AS((void)geometric_median(Uploads{}, Weights{}), ValidationError);
  WeiszfeldOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS((void)geometric_median(Uploads{{1}}, Weights{1.0}, bad), ValidationError);
  bad = {};
  bad.max_iter = 0;
  CHECK_THROWS_AS((void)geometric_median(Uploads{{1}}, Weights{1.0}, bad), ValidationError);
}

TEST_CASE("geometric_median flags non-convergence") {
  WeiszfeldOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-14;
  const auto r = geometric_median(Uploads{{0, 0}, {1, 0}, {0, 3}, {5, 5}}, equal_weights(4), opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.objective_trace.size() == 2);
}

TEST_CASE("property: fed_nga output norm at most one") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t M = uniform_int(1, 12, rng), p = uniform_int(1, 9, rng);
    const Uploads u = random_uploads(M, p, rng, std::pow(10.0, uniform_int(0, 8, rng) - 4.0));
    CHECK(norm(fed_nga(u, random_weights(M, rng))) <= 1.0 + 1e-12);
  }
}

TEST_CASE("property: fed_nga per-client positive scale invariance") {
  Rng rng(32);
  std::uniform_real_distribution<double> c(1e-3, 1e3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t M = uniform_int(1, 10, rng), p = uniform_int(1, 8, rng);
    Uploads u = random_uploads(M, p, rng);
    const Weights w = random_weights(M, rng);
    const ModelVector base = fed_nga(u, w);
    for (auto& v : u) {
      const double k = c(rng);
      for (double& x : v) x *= k;
    }
    check_close(fed_nga(u, w), base, 1e-14);
  }
}

TEST_CASE("property: permutation invariance") {
  Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t M = uniform_int(3, 9, rng), p = uniform_int(1, 5, rng);
    const Uploads u = random_uploads(M, p, rng);
    const Weights w = random_weights(M, rng);
    std::vector<std::size_t> perm(M);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const Uploads pu = permuted(u, perm);
    const Weights pw = permuted(w, perm);
    check_close(fed_nga(pu, pw), fed_nga(u, w), 1e-14);
    check_close(fedavg(pu, pw), fedavg(u, w), 1e-14);
    CHECK(coordinate_median(pu) == coordinate_median(u));
    const std::size_t k = (M - 1) / 2 > 0 ? uniform_int(0, (M - 1) / 2, rng) : 0;
    CHECK(trimmed_mean(pu, k) == trimmed_mean(u, k));
    // Krum: the winning vector is one of the score minimisers either way.
    const std::size_t b = uniform_int(0, M - 3, rng);
    const auto scores = oracle::krum_scores(u, b);
    const double best = *std::min_element(scores.begin(), scores.end());
    const ModelVector winner = krum(pu, b);
    bool among = false;
    for (std::size_t i = 0; i < M; ++i) among |= (u[i] == winner && scores[i] == best);
    CHECK(among);
    check_close(geometric_median(pu, pw).point, geometric_median(u, w).point, 1e-7);
  }
}

TEST_CASE("property: median equals maximal trimmed mean for odd M") {
  Rng rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t M = 2 * uniform_int(0, 5, rng) + 1, p = uniform_int(1, 6, rng);
    const Uploads u = random_uploads(M, p, rng);
    CHECK(coordinate_median(u) == trimmed_mean(u, (M - 1) / 2));
  }
}

TEST_CASE("property: Weiszfeld objective is non-increasing") {
  Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t M = uniform_int(2, 10, rng), p = uniform_int(1, 6, rng);
    const Uploads u = random_uploads(M, p, rng);
    const Weights w = random_weights(M, rng);
    const auto r = geometric_median(u, w);
    REQUIRE(r.objective_trace.size() == static_cast<std::size_t>(r.iterations) + 1);
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
      CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] + 1e-9);
    }
    CHECK(geometric_median_objective(u, w, r.point) ==
          doctest::Approx(r.objective_trace.back()).epsilon(1e-12));
  }
}

TEST_CASE("property: krum returns one of the uploads") {
  Rng rng(36);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t M = uniform_int(3, 10, rng), p = uniform_int(1, 5, rng);
    const Uploads u = random_uploads(M, p, rng);
    const std::size_t b = uniform_int(0, M - 3, rng);
    const ModelVector k = krum(u, b);
    CHECK(std::find(u.begin(), u.end(), k) != u.end());
    CHECK(krum_select(u, b) == oracle::krum_index(u, b));
  }
}

TEST_CASE("aggregate dispatch and names") {
  const Uploads u{{1, 0}, {0, 3}, {2, 2}};
  const Weights w = equal_weights(3);
  for (std::size_t i = 0; i < kNumAggregators; ++i) {
    const auto tag = static_cast<AggregatorTag>(i);
    CHECK(parse_aggregator(to_string(tag)) == tag);
  }
  CHECK_THROWS_AS((void)parse_aggregator("bogus"), ValidationError);
  AggregatorKind kind;
  kind.tag = AggregatorTag::FedNGA;
  CHECK(aggregate(kind, u, w) == fed_nga(u, w));
  kind.tag = AggregatorTag::FedAvg;
  CHECK(aggregate(kind, u, w) == fedavg(u, w));
  kind.tag = AggregatorTag::CoordMedian;
  CHECK(aggregate(kind, u, w) == coordinate_median(u));
  kind.tag = AggregatorTag::TrimmedMean;
  kind.trim_k = 1;
  CHECK(aggregate(kind, u, w) == trimmed_mean(u, 1));
  kind.tag = AggregatorTag::Krum;
  kind.krum_b = 0;
  CHECK(aggregate(kind, u, w) == krum(u, 0));
  kind.tag = AggregatorTag::GeomMedian;
  CHECK(aggregate(kind, u, w) == geometric_median(u, w).point);
}

}  // TEST_SUITE
