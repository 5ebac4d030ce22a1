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


#include "fednga/config.hpp"

#include <array>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "fednga/error.hpp"

namespace fednga {

namespace {

constexpr std::array<std::string_view, 37> kKeys{
    "task",          "dim",          "mu",
    "L",             "center_spread", "center_scale",
    "loss_scale",    "layers",       "data",
    "mnist_images",  "mnist_labels", "mnist_test_images",
    "mnist_test_labels", "train_samples", "test_samples",
    "synth_dim",     "synth_classes", "synth_separation",
    "M",             "attack",       "gaussian_variance",
    "c_alpha_bar",   "beta",         "aggregator",
    "trim_k",        "krum_b",       "gm_tol",
    "gm_max_iter",   "gm_smoothing", "schedule",
    "eta0",          "delta",        "T",
    "batch",         "seed",         "eval_every",
    "timing",
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool known_key(std::string_view key) {
  for (auto k : kKeys) {
    if (k == key) return true;
  }
  return false;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw ValidationError(key + ": invalid value '" + value + "' (expected " +
                        expected + ")");
}

double to_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) {
    bad_value(key, value, "a number");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  if (value.empty() || value.front() == '-') bad_value(key, value, "a non-negative integer");
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || errno == ERANGE) {
    bad_value(key, value, "a non-negative integer");
  }
  return v;
}

std::vector<std::size_t> to_widths(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::string_view rest = value;
  while (!rest.empty()) {
    const auto dash = rest.find('-');
    out.push_back(to_uint(key, std::string(rest.substr(0, dash))));
    if (dash == std::string_view::npos) break;
    rest = rest.substr(dash + 1);
  }
  if (out.empty()) bad_value(key, value, "widths like 200-200");
  return out;
}

template <typename Parse>
auto with_key(const std::string& key, Parse&& parse) {
  try {
    return parse();
  } catch (const ValidationError& e) {
    throw ValidationError(key + ": " + e.what());
  }
}

void apply(SimConfig& c, const std::string& key, const std::string& v) {
  if (key == "task") {
    if (v == "quadratic") c.task = ModelTag::Quadratic;
    else if (v == "logistic") c.task = ModelTag::Logistic;
    else if (v == "mlp") c.task = ModelTag::MLP;
    else bad_value(key, v, "quadratic, logistic or mlp");
  } else if (key == "dim") c.quadratic.dim = to_uint(key, v);
  else if (key == "mu") c.quadratic.mu = to_double(key, v);
  else if (key == "L") c.quadratic.L = to_double(key, v);
  else if (key == "center_spread") c.quadratic.center_spread = to_double(key, v);
  else if (key == "center_scale") c.quadratic.center_scale = to_double(key, v);
  else if (key == "loss_scale") c.loss_scale = to_double(key, v);
  else if (key == "layers") c.hidden_layers = to_widths(key, v);
  else if (key == "data") {
    if (v == "synthetic") c.data = DataSource::Synthetic;
    else if (v == "mnist") c.data = DataSource::Mnist;
    else bad_value(key, v, "synthetic or mnist");
  } else if (key == "mnist_images") c.mnist_images = v;
  else if (key == "mnist_labels") c.mnist_labels = v;
  else if (key == "mnist_test_images") c.mnist_test_images = v;
  else if (key == "mnist_test_labels") c.mnist_test_labels = v;
  else if (key == "train_samples") c.train_samples = to_uint(key, v);
  else if (key == "test_samples") c.test_samples = to_uint(key, v);
  else if (key == "synth_dim") c.synth_dim = to_uint(key, v);
  else if (key == "synth_classes") c.synth_classes = to_uint(key, v);
  else if (key == "synth_separation") c.synth_separation = to_double(key, v);
  else if (key == "M") c.num_clients = to_uint(key, v);
  else if (key == "attack") c.attack.tag = with_key(key, [&] { return parse_attack(v); });
  else if (key == "gaussian_variance") c.attack.gaussian_variance = to_double(key, v);
  else if (key == "c_alpha_bar") c.c_alpha_bar = to_double(key, v);
  else if (key == "beta") c.beta = to_double(key, v);
  else if (key == "aggregator") {
    c.aggregator.tag = with_key(key, [&] { return parse_aggregator(v); });
  } else if (key == "trim_k") c.aggregator.trim_k = to_uint(key, v);
  else if (key == "krum_b") {
    if (v == "auto") c.krum_b.reset();
    else c.krum_b = to_uint(key, v);
  } else if (key == "gm_tol") c.aggregator.weiszfeld.tol = to_double(key, v);
  else if (key == "gm_max_iter") {
    const auto n = to_uint(key, v);
    if (n > 100000000) bad_value(key, v, "at most 1e8");
    c.aggregator.weiszfeld.max_iter = static_cast<int>(n);
  } else if (key == "gm_smoothing") c.aggregator.weiszfeld.smoothing = to_double(key, v);
  else if (key == "schedule") c.schedule.kind = with_key(key, [&] { return parse_schedule(v); });
  else if (key == "eta0") c.schedule.eta0 = to_double(key, v);
  else if (key == "delta") c.schedule.delta = to_double(key, v);
  else if (key == "T") c.rounds = to_uint(key, v);
  else if (key == "batch") c.batch = to_uint(key, v);
  else if (key == "seed") c.seed = to_uint(key, v);
  else if (key == "eval_every") c.eval_every = to_uint(key, v);
  else if (key == "timing") {
    if (v == "on") c.record_timing = true;
    else if (v == "off") c.record_timing = false;
    else bad_value(key, v, "on or off");
  }
  else throw ValidationError(key + ": unknown key");
}

void collect(std::string_view line, std::map<std::string, std::string>& out,
             const std::string& where) {
  const auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    throw ValidationError(where + ": expected key=value, got '" + std::string(line) + "'");
  }
  const std::string key(trim(line.substr(0, eq)));
  const std::string value(trim(line.substr(eq + 1)));
  if (!known_key(key)) throw ValidationError(key + ": unknown key");
  out[key] = value;
}

// Range checks reported against the key a user would edit.
void validate_named(const SimConfig& c) {
  if (c.schedule.kind == ScheduleKind::Polynomial &&
      !(c.schedule.delta > 0.0 && c.schedule.delta < 0.5)) {
    throw ValidationError("delta: must lie in (0, 0.5) for the polynomial schedule");
  }
  if (!(c.schedule.eta0 > 0.0)) throw ValidationError("eta0: must be positive");
  if (c.attack.tag == AttackTag::Gaussian && !(c.attack.gaussian_variance > 0.0)) {
    throw ValidationError("gaussian_variance: must be positive");
  }
  validate(c);
}

}  // namespace

std::span<const std::string_view> config_keys() { return kKeys; }

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

SimConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
  std::map<std::string, std::string> values;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    ++line_no;
    collect(text.substr(0, nl), values, "line " + std::to_string(line_no));
    if (nl == std::string_view::npos) break;
    text = text.substr(nl + 1);
  }
  for (const auto& o : overrides) collect(o, values, "override '" + o + "'");

  if (!values.contains("task")) throw ValidationError("task: required key missing");
  SimConfig config;
  // task first so later keys see the right defaults.
  apply(config, "task", values.at("task"));
  for (const auto& [key, value] : values) {
    if (key != "task") apply(config, key, value);
  }
  validate_named(config);
  return config;
}

SimConfig parse_config_file(const std::filesystem::path& path,
                            std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string serialize_config(const SimConfig& c) {
  auto widths = [](const std::vector<std::size_t>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) s += '-';
      s += std::to_string(w[i]);
    }
    return s;
  };
  const char* task = c.task == ModelTag::Quadratic ? "quadratic"
                     : c.task == ModelTag::Logistic ? "logistic"
                                                    : "mlp";
  std::ostringstream out;
  auto line = [&](std::string_view key, const std::string& value) {
    out << key << '=' << value << '\n';
  };
  line("task", task);
  line("dim", std::to_string(c.quadratic.dim));
  line("mu", format_double(c.quadratic.mu));
  line("L", format_double(c.quadratic.L));
  line("center_spread", format_double(c.quadratic.center_spread));
  line("center_scale", format_double(c.quadratic.center_scale));
  line("loss_scale", format_double(c.loss_scale));
  line("layers", widths(c.hidden_layers));
  line("data", c.data == DataSource::Mnist ? "mnist" : "synthetic");
  line("mnist_images", c.mnist_images);
  line("mnist_labels", c.mnist_labels);
  line("mnist_test_images", c.mnist_test_images);
  line("mnist_test_labels", c.mnist_test_labels);
  line("train_samples", std::to_string(c.train_samples));
  line("test_samples", std::to_string(c.test_samples));
  line("synth_dim", std::to_string(c.synth_dim));
  line("synth_classes", std::to_string(c.synth_classes));
  line("synth_separation", format_double(c.synth_separation));
  line("M", std::to_string(c.num_clients));
  line("attack", std::string(to_string(c.attack.tag)));
  line("gaussian_variance", format_double(c.attack.gaussian_variance));
  line("c_alpha_bar", format_double(c.c_alpha_bar));
  line("beta", format_double(c.beta));
  line("aggregator", std::string(to_string(c.aggregator.tag)));
  line("trim_k", std::to_string(c.aggregator.trim_k));
  line("krum_b", c.krum_b ? std::to_string(*c.krum_b) : "auto");
  line("gm_tol", format_double(c.aggregator.weiszfeld.tol));
  line("gm_max_iter", std::to_string(c.aggregator.weiszfeld.max_iter));
  line("gm_smoothing", format_double(c.aggregator.weiszfeld.smoothing));
  line("schedule", std::string(to_string(c.schedule.kind)));
  line("eta0", format_double(c.schedule.eta0));
  line("delta", format_double(c.schedule.delta));
  line("T", std::to_string(c.rounds));
  line("batch", std::to_string(c.batch));
  line("seed", std::to_string(c.seed));
  line("eval_every", std::to_string(c.eval_every));
  line("timing", c.record_timing ? "on" : "off");
  return out.str();
}

std::string records_csv(std::span<const RoundRecord> records) {
  std::string out = "t,eta,loss,grad_norm,gap,theta_max,accuracy,agg_time_ns\n";
  auto cell = [&](const std::optional<double>& v) {
    out += ',';
    if (v) out += format_double(*v);
  };
  for (const auto& r : records) {
    out += std::to_string(r.t);
    out += ',';
    out += format_double(r.eta);
    cell(r.loss);
    cell(r.grad_norm);
    cell(r.gap);
    cell(r.theta_max);
    cell(r.accuracy);
    out += ',';
    if (r.agg_time_ns) out += std::to_string(*r.agg_time_ns);
    out += '\n';
  }
  return out;
}

void write_records_csv(std::span<const RoundRecord> records,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << records_csv(records);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<RoundRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t,eta,loss,grad_norm,gap,theta_max,accuracy,agg_time_ns") {
    throw FormatError(path.string() + ": unexpected header");
  }
  std::vector<RoundRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 8) throw FormatError(where + ": expected 8 columns");
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) {
        throw FormatError(where + ": bad number '" + s + "'");
      }
      return v;
    };
    auto integer = [&](const std::string& s) {
      char* end = nullptr;
      const long long v = std::strtoll(s.c_str(), &end, 10);
      if (s.empty() || end != s.c_str() + s.size()) {
        throw FormatError(where + ": bad integer '" + s + "'");
      }
      return v;
    };
    auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return num(s);
    };
    RoundRecord r;
    const long long t = integer(cells[0]);
    if (t < 0) throw FormatError(where + ": negative round index");
    r.t = static_cast<std::size_t>(t);
    r.eta = num(cells[1]);
    r.loss = opt(cells[2]);
    r.grad_norm = opt(cells[3]);
    r.gap = opt(cells[4]);
    r.theta_max = opt(cells[5]);
    r.accuracy = opt(cells[6]);
    if (!cells[7].empty()) r.agg_time_ns = integer(cells[7]);
    records.push_back(r);
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, const SimConfig& config,
                    const ManifestInfo& info) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "#@ version=" << info.version << '\n';
  out << "#@ command=" << info.command << '\n';
  out << "#@ seed=" << config.seed << '\n';
  out << "#@ start_time=" << info.start_time << '\n';
  out << "#@ end_time=" << info.end_time << '\n';
  for (const auto& [name, file] : info.outputs) {
    out << "#@ output." << name << '=' << file << '\n';
  }
  out << serialize_config(config);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_manifest(const std::filesystem::path& path, const ManifestInfo& info,
                    const std::map<std::string, std::string>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "#@ version=" << info.version << '\n';
  out << "#@ command=" << info.command << '\n';
  out << "#@ start_time=" << info.start_time << '\n';
  out << "#@ end_time=" << info.end_time << '\n';
  for (const auto& [name, file] : info.outputs) {
    out << "#@ output." << name << '=' << file << '\n';
  }
  for (const auto& [key, value] : params) {
    out << "#@ param." << key << '=' << value << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace fednga
