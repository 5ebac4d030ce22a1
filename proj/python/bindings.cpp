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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <utility>
#include <vector>

#include "fednga/aggregation.hpp"
#include "fednga/attacks.hpp"
#include "fednga/bench.hpp"
#include "fednga/config.hpp"
#include "fednga/data.hpp"
#include "fednga/error.hpp"
#include "fednga/gradcheck.hpp"
#include "fednga/simulator.hpp"
#include "fednga/theory.hpp"
#include "fednga/vecmath.hpp"

namespace py = pybind11;
using namespace fednga;

namespace {

using Uploads = std::vector<ModelVector>;

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(std::span<const double> v) {
  return to_array(std::vector<double>(v.begin(), v.end()));
}

AggregatorKind make_kind(const std::string& name, std::size_t trim_k, std::size_t krum_b) {
  AggregatorKind kind;
  kind.tag = parse_aggregator(name);
  kind.trim_k = trim_k;
  kind.krum_b = krum_b;
  return kind;
}

py::dict bound_dict(const BoundCheck& b) {
  py::dict d;
  d["applicable"] = b.applicable;
  d["holds"] = b.holds;
  d["lhs"] = b.lhs;
  d["rhs"] = b.rhs;
  return d;
}

py::dict theory_dict(const TheoryParams& t) {
  py::dict d;
  d["L"] = t.L;
  d["mu"] = t.mu;
  d["G"] = t.G;
  d["theta"] = t.theta;
  d["theta_measured"] = t.theta_measured;
  d["c_alpha"] = t.c_alpha;
  d["gamma"] = t.gamma;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fednga, m) {
  m.doc() = "Normalized-gradient federated aggregation simulator";

  static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  static py::exception<FormatError> format_error(m, "FormatError", PyExc_ValueError);
  static py::exception<NonFiniteError> non_finite_error(m, "NonFiniteError",
                                                        PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const FormatError& e) {
      py::set_error(format_error, e.what());
    } catch (const NonFiniteError& e) {
      py::set_error(non_finite_error, e.what());
    }
  });

  // Vector operations and aggregators.
  m.def("normalize", [](const ModelVector& v) { return to_array(normalize(v)); }, py::arg("v"));
  m.def("fed_nga", [](const Uploads& u, const std::vector<double>& w) {
    return to_array(fed_nga(u, w));
  }, py::arg("uploads"), py::arg("weights"));
  m.def("fedavg", [](const Uploads& u, const std::vector<double>& w) {
    return to_array(fedavg(u, w));
  }, py::arg("uploads"), py::arg("weights"));
  m.def("coordinate_median", [](const Uploads& u) { return to_array(coordinate_median(u)); },
        py::arg("uploads"));
  m.def("trimmed_mean", [](const Uploads& u, std::size_t k) {
    return to_array(trimmed_mean(u, k));
  }, py::arg("uploads"), py::arg("k"));
  m.def("krum_select", [](const Uploads& u, std::size_t b) { return krum_select(u, b); },
        py::arg("uploads"), py::arg("b"));
  m.def("krum", [](const Uploads& u, std::size_t b) { return to_array(krum(u, b)); },
        py::arg("uploads"), py::arg("b"));
  m.def("geometric_median",
        [](const Uploads& u, const std::vector<double>& w, double tol, int max_iter,
           double smoothing) {
          return to_array(geometric_median(u, w, {tol, max_iter, smoothing}).point);
        },
        py::arg("uploads"), py::arg("weights"), py::arg("tol") = 1e-10,
        py::arg("max_iter") = 100, py::arg("smoothing") = 1e-8);
  m.def("aggregate",
        [](const std::string& name, const Uploads& u, const std::vector<double>& w,
           std::size_t trim_k, std::size_t krum_b) {
          return to_array(aggregate(make_kind(name, trim_k, krum_b), u, w));
        },
        py::arg("name"), py::arg("uploads"), py::arg("weights"), py::arg("trim_k") = 0,
        py::arg("krum_b") = 0);

  // Attacks.
  m.def("sign_flip", [](const Uploads& honest) { return to_array(sign_flip(honest)); },
        py::arg("honest_uploads"));
  m.def("gaussian_attack", [](std::size_t dim, std::uint64_t seed, double variance) {
    Rng rng(seed);
    return to_array(gaussian_attack(dim, rng, variance));
  }, py::arg("dim"), py::arg("seed"), py::arg("variance") = kDefaultGaussianVariance);
  m.def("same_value", [](std::size_t dim) { return to_array(same_value(dim)); }, py::arg("dim"));

  // Data.
  m.def("dirichlet_partition",
        [](const std::vector<int>& labels, std::size_t num_clients, double beta,
           std::uint64_t seed) {
          Rng rng(seed);
          std::vector<std::vector<std::size_t>> out;
          for (auto& shard : dirichlet_partition(labels, num_clients, beta, rng)) {
            out.push_back(std::move(shard.indices));
          }
          return out;
        },
        py::arg("labels"), py::arg("num_clients"), py::arg("beta"), py::arg("seed"));

  // Step sizes and constants.
  m.def("lr_schedule",
        [](const std::string& kind, double eta0, double delta, std::size_t t) {
          return lr_schedule(parse_schedule(kind), eta0, delta, t);
        },
        py::arg("kind"), py::arg("eta0"), py::arg("delta"), py::arg("t"));
  m.def("compute_gamma", &compute_gamma, py::arg("mu"), py::arg("L"), py::arg("theta"),
        py::arg("c_alpha"), py::arg("G"));
  m.def("descent_coefficient", &descent_coefficient, py::arg("theta"), py::arg("c_alpha"));

  // Configuration.
  py::class_<SimConfig>(m, "Config")
      .def(py::init<>())
      .def_static("parse",
                  [](const std::string& text, const std::vector<std::string>& overrides) {
                    return parse_config(text, overrides);
                  },
                  py::arg("text"), py::arg("overrides") = std::vector<std::string>{})
      .def_static("load",
                  [](const std::filesystem::path& path, const std::vector<std::string>& o) {
                    return parse_config_file(path, o);
                  },
                  py::arg("path"), py::arg("overrides") = std::vector<std::string>{})
      .def("serialize", &serialize_config)
      .def("__str__", &serialize_config)
      .def("__eq__", [](const SimConfig& a, const SimConfig& b) { return a == b; })
      .def_readwrite("rounds", &SimConfig::rounds)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("num_clients", &SimConfig::num_clients)
      .def_readwrite("c_alpha_bar", &SimConfig::c_alpha_bar)
      .def_readwrite("batch", &SimConfig::batch)
      .def_readwrite("eval_every", &SimConfig::eval_every)
      .def_readwrite("threads", &SimConfig::threads);
  m.def("config_keys", [] {
    std::vector<std::string> keys;
    for (auto k : config_keys()) keys.emplace_back(k);
    return keys;
  });

  // Simulation.
  py::class_<RoundRecord>(m, "RoundRecord")
      .def_readonly("t", &RoundRecord::t)
      .def_readonly("eta", &RoundRecord::eta)
      .def_readonly("loss", &RoundRecord::loss)
      .def_readonly("grad_norm", &RoundRecord::grad_norm)
      .def_readonly("gap", &RoundRecord::gap)
      .def_readonly("theta_max", &RoundRecord::theta_max)
      .def_readonly("accuracy", &RoundRecord::accuracy)
      .def_readonly("agg_time_ns", &RoundRecord::agg_time_ns)
      .def_readonly("degenerate_uploads", &RoundRecord::degenerate_uploads);

  py::class_<SimulationResult>(m, "SimulationResult")
      .def_readonly("records", &SimulationResult::records)
      .def_property_readonly("final_params",
                             [](const SimulationResult& r) { return to_array(r.final_params); })
      .def_property_readonly("optimum",
                             [](const SimulationResult& r) -> py::object {
                               if (!r.optimum) return py::none();
                               return to_array(*r.optimum);
                             })
      .def_property_readonly("theory",
                             [](const SimulationResult& r) { return theory_dict(r.theory); })
      .def_property_readonly("byzantine_clients",
                             [](const SimulationResult& r) { return r.byzantine.clients; })
      .def("records_csv", [](const SimulationResult& r) { return records_csv(r.records); })
      .def("write_records", [](const SimulationResult& r, const std::filesystem::path& path) {
        write_records_csv(r.records, path);
      }, py::arg("path"));

  m.def("run_simulation", &run_simulation, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("read_records_csv", &read_records_csv, py::arg("path"));

  // Bounds.
  m.def("theorem1_check",
        [](const SimulationResult& r) {
          return bound_dict(theorem1_check(r.records, r.theory.L, r.theory.theta,
                                           r.theory.c_alpha));
        },
        py::arg("result"));
  m.def("theorem2_bounds",
        [](const SimulationResult& r, double gamma) {
          const Theorem2Result t = theorem2_bounds(r.records, gamma);
          py::dict d;
          d["final_gap"] = bound_dict(t.final_gap);
          d["average_gap"] = bound_dict(t.average_gap);
          return d;
        },
        py::arg("result"), py::arg("gamma"));
  m.def("lemma1_report",
        [](const SimulationResult& r, py::object gamma) {
          const LemmaReport rep = gamma.is_none() ? lemma1_report_running(r.records)
                                                  : lemma1_report(r.records, gamma.cast<double>());
          py::dict d;
          d["applicable"] = rep.applicable;
          d["steps_checked"] = rep.steps_checked;
          d["violations"] = rep.violations;
          d["first_violation"] = rep.first_violation;
          d["worst_slack"] = rep.worst_slack;
          return d;
        },
        py::arg("result"), py::arg("gamma") = py::none());
  m.def("calibrate_constant_step",
        [](const SimConfig& config, double fraction) {
          GammaCalibration cal;
          {
            py::gil_scoped_release release;
            cal = calibrate_constant_step(config, fraction);
          }
          return py::make_tuple(cal.ok, cal.eta, cal.gamma, std::move(cal.run));
        },
        py::arg("config"), py::arg("fraction"));

  // Benchmarks and gradient checks.
  py::class_<BenchResult>(m, "BenchResult")
      .def_property_readonly("aggregator",
                             [](const BenchResult& r) { return std::string(to_string(r.kind)); })
      .def_readonly("p", &BenchResult::p)
      .def_readonly("num_clients", &BenchResult::num_clients)
      .def_readonly("reps", &BenchResult::reps)
      .def_readonly("median_ns", &BenchResult::median_ns)
      .def_readonly("mean_ns", &BenchResult::mean_ns)
      .def_readonly("min_ns", &BenchResult::min_ns)
      .def_readonly("times_ns", &BenchResult::times_ns);
  m.def("bench_aggregator",
        [](const std::string& name, std::size_t p, std::size_t num_clients, std::size_t reps,
           std::uint64_t seed, std::size_t trim_k, std::size_t krum_b) {
          Rng rng(seed);
          py::gil_scoped_release release;
          return bench_aggregator(make_kind(name, trim_k, krum_b), p, num_clients, reps, rng);
        },
        py::arg("name"), py::arg("p"), py::arg("num_clients"), py::arg("reps"),
        py::arg("seed") = 0, py::arg("trim_k") = 0, py::arg("krum_b") = 0);
  m.def("fit_loglog_slope",
        [](const std::vector<std::pair<double, double>>& pts) { return fit_loglog_slope(pts); },
        py::arg("points"));

  py::class_<GradCheckResult>(m, "GradCheckResult")
      .def_property_readonly("spec", [](const GradCheckResult& r) { return to_string(r.spec); })
      .def_readonly("tolerance", &GradCheckResult::tolerance)
      .def_readonly("errors", &GradCheckResult::errors)
      .def_readonly("max_error", &GradCheckResult::max_error)
      .def_readonly("passed", &GradCheckResult::passed);
  m.def("gradient_check",
        [](const std::string& spec, std::size_t trials, std::uint64_t seed) {
          return gradient_check(parse_model_spec(spec), trials, seed);
        },
        py::arg("spec"), py::arg("trials"), py::arg("seed") = 0);
}
