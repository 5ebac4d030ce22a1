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
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "fednga/bench.hpp"
#include "fednga/error.hpp"

using namespace fednga;

TEST_SUITE("bench") {

TEST_CASE("fit_loglog_slope on exact power laws") {
  std::vector<std::pair<double, double>> linear, square;
  for (double s : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    linear.emplace_back(s, 3.5 * s);
    square.emplace_back(s, 0.25 * s * s);
  }
  CHECK(std::abs(fit_loglog_slope(linear) - 1.0) < 1e-9);
  CHECK(std::abs(fit_loglog_slope(square) - 2.0) < 1e-9);
}

TEST_CASE("fit_loglog_slope rejects degenerate input") {
  using P = std::vector<std::pair<double, double>>;
  CHECK_THROWS_AS((void)fit_loglog_slope(P{{1, 1}, {2, 2}, {3, 3}}), ValidationError);
  CHECK_THROWS_AS((void)fit_loglog_slope(P{{1, 1}, {2, 2}, {2, 3}, {4, 4}}), ValidationError);
  CHECK_THROWS_AS((void)fit_loglog_slope(P{{1, 1}, {2, 0}, {3, 3}, {4, 4}}), ValidationError);
  CHECK_THROWS_AS((void)fit_loglog_slope(P{{0, 1}, {2, 2}, {3, 3}, {4, 4}}), ValidationError);
}

TEST_CASE("bench_aggregator smoke") {
  Rng rng(101);
  AggregatorKind k;
  const BenchResult r = bench_aggregator(k, 10000, 100, 5, rng);
  CHECK(r.reps == 5);
  CHECK(r.times_ns.size() == 5);
  for (auto t : r.times_ns) CHECK(t > 0);
  CHECK(std::isfinite(r.median_ns));
  CHECK(r.min_ns <= r.median_ns);
  CHECK(r.min_ns <= r.mean_ns);
  CHECK_THROWS_AS((void)bench_aggregator(k, 10, 10, 4, rng), ValidationError);
  CHECK_THROWS_AS((void)bench_aggregator(k, 0, 10, 5, rng), ValidationError);
}

TEST_CASE("Krum is slower than Fed-NGA at M=100") {
  Rng rng(102);
  AggregatorKind nga, krum;
  krum.tag = AggregatorTag::Krum;
  krum.krum_b = 20;
  const double t_nga = bench_aggregator(nga, 10000, 100, 5, rng).median_ns;
  const double t_krum = bench_aggregator(krum, 10000, 100, 5, rng).median_ns;
  CHECK(t_krum > t_nga);
}

TEST_CASE("bench CSV") {
  Rng rng(103);
  AggregatorKind k;
  std::vector<BenchResult> rs{bench_aggregator(k, 64, 8, 5, rng)};
  const auto p = std::filesystem::temp_directory_path() / "fednga_bench_test.csv";
  write_bench_csv(rs, p);
  std::ifstream in(p);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "aggregator,p,M,reps,median_ns,mean_ns,min_ns");
  CHECK(row.rfind("fednga,64,8,5,", 0) == 0);
}

}  // TEST_SUITE
