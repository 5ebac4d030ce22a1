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


// fednga: command-line driver for simulations, benchmarks, bound checks and
// gradient checks.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "fednga/bench.hpp"
#include "fednga/config.hpp"
#include "fednga/error.hpp"
#include "fednga/gradcheck.hpp"
#include "fednga/rng.hpp"
#include "fednga/simulator.hpp"

namespace fs = std::filesystem;
using namespace fednga;

namespace {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kNonFinite = 2,
  kBoundNotApplicable = 3,
  kBoundViolated = 4,
};

std::string join_argv(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

// "a:b" -> a, 2a, 4a, ... up to and including b.
std::vector<std::size_t> parse_sweep(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  std::size_t a = 0, b = 0;
  try {
    if (colon == std::string::npos) {
      a = b = std::stoul(text);
    } else {
      a = std::stoul(text.substr(0, colon));
      b = std::stoul(text.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw ValidationError(std::string(flag) + ": expected a:b, got '" + text + "'");
  }
  if (a == 0 || b < a) {
    throw ValidationError(std::string(flag) + ": need 1 <= a <= b, got '" + text + "'");
  }
  std::vector<std::size_t> out;
  for (std::size_t v = a; v <= b; v *= 2) out.push_back(v);
  return out;
}

fs::path prepare_out(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  return out;
}

void warn_degenerate(const std::vector<RoundRecord>& records) {
  std::size_t total = 0;
  std::optional<std::size_t> first;
  for (const auto& r : records) {
    total += r.degenerate_uploads;
    if (r.degenerate_uploads && !first) first = r.t;
  }
  if (total) {
    std::cerr << "warning: " << total
              << " upload(s) had norm below 1e-12 and were aggregated as zero (first at round "
              << *first << ")\n";
  }
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "fednga-out";
  std::size_t threads = 0;
  std::vector<std::string> overrides;
};

SimConfig load_config(const RunArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (args.seed) overrides.push_back("seed=" + std::to_string(*args.seed));
  SimConfig config = parse_config_file(args.config, overrides);
  config.threads = args.threads;
  return config;
}

int cmd_run(const RunArgs& args, const std::string& command) {
  const SimConfig config = load_config(args);
  const fs::path out = prepare_out(args.out);
  ManifestInfo info{std::string(kVersion), command, utc_timestamp(), "",
                    {{"records", (out / "records.csv").string()}}};
  write_manifest(out / "manifest.txt", config, info);

  const SimulationResult result = run_simulation(config);
  write_records_csv(result.records, out / "records.csv");
  info.end_time = utc_timestamp();
  write_manifest(out / "manifest.txt", config, info);
  warn_degenerate(result.records);

  const RoundRecord& last = result.records.back();
  std::printf("rounds=%zu byzantine=%zu achieved_c_alpha_bar=%.6g\n", config.rounds,
              result.byzantine.clients.size(), result.byzantine.achieved);
  if (last.loss) std::printf("final_loss=%.10g\n", *last.loss);
  if (last.grad_norm) std::printf("final_grad_norm=%.10g\n", *last.grad_norm);
  if (last.gap) std::printf("final_gap=%.10g\n", *last.gap);
  if (last.accuracy) std::printf("final_accuracy=%.6g\n", *last.accuracy);
  std::printf("wrote %s\n", (out / "records.csv").string().c_str());
  return kOk;
}

struct BoundLine {
  std::string name;
  bool applicable = false;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};

BoundLine named(std::string name) {
  BoundLine l;
  l.name = std::move(name);
  return l;
}

int cmd_check_bounds(const RunArgs& args, const std::string& command) {
  SimConfig config = load_config(args);
  config.batch = 0;
  config.eval_every = 1;
  const fs::path out = prepare_out(args.out);
  ManifestInfo info{std::string(kVersion), command, utc_timestamp(), "",
                    {{"records", (out / "records.csv").string()},
                     {"bounds", (out / "bounds.csv").string()}}};
  write_manifest(out / "manifest.txt", config, info);

  const SimulationResult result = run_simulation(config);
  write_records_csv(result.records, out / "records.csv");
  warn_degenerate(result.records);
  const TheoryParams& th = result.theory;

  std::vector<BoundLine> lines;
  {
    BoundLine l = named("theorem1");
    if (!std::isfinite(th.L)) {
      l.note = "smoothness constant L is only known for the quadratic task";
    } else if (!th.theta_measured) {
      l.note = "theta was never measurable";
    } else {
      const BoundCheck c = theorem1_check(result.records, th.L, th.theta, th.c_alpha);
      l = {"theorem1", c.applicable, c.holds, c.lhs, c.rhs,
           c.applicable ? "" : "(2 - theta^2/2) C_alpha - 1 <= 0"};
    }
    lines.push_back(l);
  }
  const bool have_gap = result.records.front().gap.has_value();
  {
    BoundLine l = named("lemma1");
    if (!have_gap) {
      l.note = "optimum unknown";
    } else {
      const LemmaReport rep = lemma1_report(result.records, th.gamma);
      l.applicable = rep.applicable;
      l.holds = rep.applicable && rep.violations == 0;
      l.lhs = rep.worst_slack;
      l.rhs = 0.0;
      if (!rep.applicable) {
        l.note = "needs gamma > 0 and eta^t < 1/gamma at every round";
      } else if (rep.violations) {
        l.note = std::to_string(rep.violations) + " violating step(s), first at t=" +
                 std::to_string(*rep.first_violation);
      }
    }
    lines.push_back(l);
  }
  {
    BoundLine final_gap = named("theorem2_final");
    BoundLine avg_gap = named("theorem2_average");
    if (!have_gap) {
      final_gap.note = avg_gap.note = "optimum unknown";
    } else {
      const Theorem2Result t2 = theorem2_bounds(result.records, th.gamma);
      final_gap = {"theorem2_final", t2.final_gap.applicable, t2.final_gap.holds,
                   t2.final_gap.lhs, t2.final_gap.rhs, ""};
      avg_gap = {"theorem2_average", t2.average_gap.applicable, t2.average_gap.holds,
                 t2.average_gap.lhs, t2.average_gap.rhs, ""};
      if (!t2.final_gap.applicable) {
        final_gap.note = avg_gap.note = "needs gamma > 0 and eta^t < 1/gamma at every round";
      }
    }
    lines.push_back(final_gap);
    lines.push_back(avg_gap);
  }

  std::ostringstream csv;
  csv << "bound,applicable,holds,lhs,rhs\n";
  bool any_applicable = false, any_violated = false;
  std::printf("L=%s mu=%s G=%s theta=%s C_alpha=%s gamma=%s\n", format_double(th.L).c_str(),
              format_double(th.mu).c_str(), format_double(th.G).c_str(),
              format_double(th.theta).c_str(), format_double(th.c_alpha).c_str(),
              format_double(th.gamma).c_str());
  for (const auto& l : lines) {
    any_applicable |= l.applicable;
    any_violated |= l.applicable && !l.holds;
    csv << l.name << ',' << (l.applicable ? 1 : 0) << ',' << (l.applicable && l.holds ? 1 : 0)
        << ',' << (l.applicable ? format_double(l.lhs) : "") << ','
        << (l.applicable ? format_double(l.rhs) : "") << '\n';
    const char* status = !l.applicable ? "N/A" : (l.holds ? "HOLDS" : "VIOLATED");
    if (l.applicable && l.name != "lemma1") {
      std::printf("%-17s %-8s lhs=%.10g rhs=%.10g", l.name.c_str(), status, l.lhs, l.rhs);
    } else if (l.applicable) {
      std::printf("%-17s %-8s worst_slack=%.6g", l.name.c_str(), status, l.lhs);
    } else {
      std::printf("%-17s %-8s", l.name.c_str(), status);
    }
    if (!l.note.empty()) std::printf("  (%s)", l.note.c_str());
    std::printf("\n");
  }
  {
    std::ofstream f(out / "bounds.csv", std::ios::binary);
    f << csv.str();
    if (!f) throw std::runtime_error("write failed for " + (out / "bounds.csv").string());
  }
  info.end_time = utc_timestamp();
  write_manifest(out / "manifest.txt", config, info);
  if (any_violated) return kBoundViolated;
  if (!any_applicable) return kBoundNotApplicable;
  return kOk;
}

struct BenchArgs {
  std::string agg = "all";
  std::string p_sweep = "4096:262144";
  std::string m_sweep = "100:100";
  std::size_t reps = kMinBenchReps;
  std::uint64_t seed = 0;
  double trim_frac = 0.1;
  double krum_frac = 0.2;
  std::string out = "fednga-out";
};

AggregatorKind bench_kind(AggregatorTag tag, std::size_t M, const BenchArgs& args) {
  AggregatorKind kind;
  kind.tag = tag;
  kind.trim_k = static_cast<std::size_t>(args.trim_frac * static_cast<double>(M));
  if (2 * kind.trim_k >= M) kind.trim_k = (M - 1) / 2;
  kind.krum_b = static_cast<std::size_t>(args.krum_frac * static_cast<double>(M));
  if (M < 3) {
    kind.krum_b = 0;
  } else if (kind.krum_b + 3 > M) {
    kind.krum_b = M - 3;
  }
  return kind;
}

int cmd_bench(const BenchArgs& args, const std::string& command) {
  if (!(args.trim_frac >= 0.0 && args.trim_frac < 0.5)) {
    throw ValidationError("--trim-frac must lie in [0, 0.5)");
  }
  if (!(args.krum_frac >= 0.0 && args.krum_frac < 1.0)) {
    throw ValidationError("--krum-frac must lie in [0, 1)");
  }
  if (args.reps < kMinBenchReps) {
    throw ValidationError("--reps must be at least " + std::to_string(kMinBenchReps));
  }
  std::vector<AggregatorTag> tags;
  if (args.agg == "all") {
    tags = {AggregatorTag::FedNGA, AggregatorTag::FedAvg, AggregatorTag::CoordMedian,
            AggregatorTag::TrimmedMean, AggregatorTag::Krum, AggregatorTag::GeomMedian};
  } else {
    tags = {parse_aggregator(args.agg)};
  }
  const auto ps = parse_sweep(args.p_sweep, "--p-sweep");
  const auto ms = parse_sweep(args.m_sweep, "--m-sweep");
  const fs::path out = prepare_out(args.out);
  ManifestInfo info{std::string(kVersion), command, utc_timestamp(), "",
                    {{"bench", (out / "bench.csv").string()}}};
  const std::map<std::string, std::string> params{
      {"agg", args.agg}, {"p_sweep", args.p_sweep}, {"m_sweep", args.m_sweep},
      {"reps", std::to_string(args.reps)}, {"seed", std::to_string(args.seed)},
      {"trim_frac", format_double(args.trim_frac)},
      {"krum_frac", format_double(args.krum_frac)}};
  write_manifest(out / "manifest.txt", info, params);

  Rng rng = make_rng(args.seed, Stream::Bench);
  std::vector<BenchResult> results;
  for (AggregatorTag tag : tags) {
    for (std::size_t M : ms) {
      for (std::size_t p : ps) {
        results.push_back(bench_aggregator(bench_kind(tag, M, args), p, M, args.reps, rng));
        const BenchResult& r = results.back();
        std::printf("%-13s p=%-8zu M=%-5zu median_ns=%.0f\n",
                    std::string(to_string(tag)).c_str(), p, M, r.median_ns);
      }
    }
  }
  write_bench_csv(results, out / "bench.csv");

  for (AggregatorTag tag : tags) {
    const std::string name(to_string(tag));
    if (ps.size() >= 4) {
      for (std::size_t M : ms) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : results) {
          if (r.kind == tag && r.num_clients == M) {
            pts.emplace_back(static_cast<double>(r.p), r.median_ns);
          }
        }
        std::printf("slope %s vs p (M=%zu): %.3f\n", name.c_str(), M, fit_loglog_slope(pts));
      }
    }
    if (ms.size() >= 4) {
      for (std::size_t p : ps) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : results) {
          if (r.kind == tag && r.p == p) {
            pts.emplace_back(static_cast<double>(r.num_clients), r.median_ns);
          }
        }
        std::printf("slope %s vs M (p=%zu): %.3f\n", name.c_str(), p, fit_loglog_slope(pts));
      }
    }
  }
  info.end_time = utc_timestamp();
  write_manifest(out / "manifest.txt", info, params);
  std::printf("wrote %s\n", (out / "bench.csv").string().c_str());
  return kOk;
}

struct GradArgs {
  std::string model;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  std::size_t batch = 8;
  std::string out = "fednga-out";
};

int cmd_gradcheck(const GradArgs& args, const std::string& command) {
  const ModelSpec spec = parse_model_spec(args.model);
  const fs::path out = prepare_out(args.out);
  ManifestInfo info{std::string(kVersion), command, utc_timestamp(), "",
                    {{"gradcheck", (out / "gradcheck.csv").string()}}};
  const std::map<std::string, std::string> params{
      {"model", to_string(spec)}, {"trials", std::to_string(args.trials)},
      {"seed", std::to_string(args.seed)}, {"batch", std::to_string(args.batch)}};
  write_manifest(out / "manifest.txt", info, params);

  const GradCheckResult r = gradient_check(spec, args.trials, args.seed, args.batch);
  {
    std::ofstream f(out / "gradcheck.csv", std::ios::binary);
    f << "trial,relative_error\n";
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      f << i << ',' << format_double(r.errors[i]) << '\n';
    }
    if (!f) throw std::runtime_error("write failed for gradcheck.csv");
  }
  info.end_time = utc_timestamp();
  write_manifest(out / "manifest.txt", info, params);
  std::printf("model=%s params=%zu trials=%zu max_rel_error=%.3e tolerance=%.0e %s\n",
              to_string(spec).c_str(), spec.num_params(), args.trials, r.max_error,
              r.tolerance, r.passed ? "PASS" : "FAIL");
  return r.passed ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning with normalized gradient aggregation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one simulation and write records.csv");
  run->add_option("--config", run_args.config, "Config file (key = value lines)")->required();
  run->add_option("--seed", run_args.seed, "Master seed (overrides the file)");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--threads", run_args.threads,
                  "Worker threads, 0 = all cores (capped by FEDNGA_THREADS)");
  run->add_option("overrides", run_args.overrides, "key=value overrides");

  RunArgs bound_args;
  auto* bounds = app.add_subcommand(
      "check-bounds", "Run full-batch and check the convergence bounds (exit 3 = N/A, 4 = violated)");
  bounds->add_option("--config", bound_args.config, "Config file")->required();
  bounds->add_option("--seed", bound_args.seed, "Master seed (overrides the file)");
  bounds->add_option("--out", bound_args.out, "Output directory");
  bounds->add_option("--threads", bound_args.threads, "Worker threads");
  bounds->add_option("overrides", bound_args.overrides, "key=value overrides");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time the aggregators over p and M sweeps");
  bench->add_option("--agg", bench_args.agg, "Aggregator name or 'all'");
  bench->add_option("--p-sweep", bench_args.p_sweep, "a:b, doubling from a up to b");
  bench->add_option("--m-sweep", bench_args.m_sweep, "a:b, doubling from a up to b");
  bench->add_option("--reps", bench_args.reps, "Timed repetitions per point (>= 5)");
  bench->add_option("--seed", bench_args.seed, "Seed for the synthetic uploads");
  bench->add_option("--trim-frac", bench_args.trim_frac, "Trimmed mean: k = floor(frac * M)");
  bench->add_option("--krum-frac", bench_args.krum_frac, "Krum: b = floor(frac * M)");
  bench->add_option("--out", bench_args.out, "Output directory");

  GradArgs grad_args;
  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  grad->add_option("--model", grad_args.model, "quadratic:p, logistic:in-classes, mlp:in-h1-...-classes")
      ->required();
  grad->add_option("--trials", grad_args.trials, "Random draws");
  grad->add_option("--seed", grad_args.seed, "Seed");
  grad->add_option("--batch", grad_args.batch, "Samples per classifier draw");
  grad->add_option("--out", grad_args.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  const std::string command = join_argv(argc, argv);
  try {
    if (*run) return cmd_run(run_args, command);
    if (*bounds) return cmd_check_bounds(bound_args, command);
    if (*bench) return cmd_bench(bench_args, command);
    if (*grad) return cmd_gradcheck(grad_args, command);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NonFiniteError& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kNonFinite;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNonFinite;
  }
  return kOk;
}
