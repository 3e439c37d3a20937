/* Copyright 2026 The Newton-GRAPE Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "grape/bench/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <random>
#include <sstream>

namespace grape::bench {

using nlohmann::json;

namespace {

constexpr const char *hcf_preset = R"({
  "name": "hcf",
  "spin_system": {
    "isotopes": ["1H", "13C", "19F"],
    "magnet_field": 9.4,
    "offsets_ppm": [0.0, 0.0, 0.0],
    "couplings": [
      {"spins": [0, 1], "hz": 140.0},
      {"spins": [1, 2], "hz": -160.0}
    ]
  },
  "states": {
    "initial": {"kind": "lz_sum", "spins": [0]},
    "target": {"kind": "lz_sum", "spins": [2]}
  },
  "controls": {
    "channels": [
      {"name": "Hx", "spins": [0], "axis": "x"},
      {"name": "Hy", "spins": [0], "axis": "y"},
      {"name": "Cx", "spins": [1], "axis": "x"},
      {"name": "Cy", "spins": [1], "axis": "y"},
      {"name": "Fx", "spins": [2], "axis": "x"},
      {"name": "Fy", "spins": [2], "axis": "y"}
    ],
    "slices": 50,
    "duration": 0.1,
    "nominal_power_hz": 1000.0,
    "initial_guess": {"kind": "uniform", "fraction": 0.05},
    "ensemble_scalings": [1.0]
  },
  "penalties": [
    {"kind": "spillout", "weight": 1.0, "upper_hz": 10000.0, "lower_hz": -10000.0}
  ],
  "optimizer": {
    "method": "newton_rfo",
    "grad_tol": 1e-6,
    "max_iterations": 1000,
    "trajectory_budget": 2000
  },
  "output": {"directory": "grape_out", "seed": 1, "workers": 1, "fidelity_norm": 1.0}
})";

constexpr const char *singlet_preset = R"({
  "name": "singlet",
  "spin_system": {
    "isotopes": ["13C", "13C"],
    "magnet_field": 14.1,
    "offsets_ppm": [0.0, 0.25],
    "couplings": [{"spins": [0, 1], "hz": 60.0}]
  },
  "states": {
    "initial": {"kind": "lz_sum", "spins": [0, 1]},
    "target": {"kind": "singlet", "spins": [0, 1]}
  },
  "controls": {
    "channels": [
      {"name": "Cx", "spins": [0, 1], "axis": "x"},
      {"name": "Cy", "spins": [0, 1], "axis": "y"}
    ],
    "slices": 50,
    "duration": 0.05,
    "nominal_power_hz": 60.0,
    "initial_guess": {"kind": "uniform", "fraction": 0.05},
    "ensemble_scalings": {"min": 0.8, "max": 1.2, "count": 10}
  },
  "penalties": [
    {"kind": "norm_square", "weight": 1e-4}
  ],
  "optimizer": {
    "method": "newton_rfo",
    "grad_tol": 1e-6,
    "max_iterations": 1000,
    "trajectory_budget": 1500
  },
  "output": {"directory": "grape_out", "seed": 1, "workers": 1,
             "fidelity_norm": 0.81649658092772603}
})";

std::string join(const std::string &path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void fail(const std::string &path, const std::string &what) {
  throw config_error(path + ": " + what);
}

void expect_object(const json &j, const std::string &path,
                   std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto &item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(join(path, item.key()), "unknown key");
  }
}

const json *find(const json &obj, std::string_view key) {
  const auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

const json &require(const json &obj, const std::string &path, std::string_view key) {
  const json *v = find(obj, key);
  if (!v) fail(join(path, key), "required key missing");
  return *v;
}

double as_number(const json &v, const std::string &path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "expected a finite number");
  return d;
}

std::uint64_t as_count(const json &v, const std::string &path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json &v, const std::string &path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json &v, const std::string &path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

const json &as_array(const json &v, const std::string &path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

std::vector<std::size_t> as_indices(const json &v, const std::string &path) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < as_array(v, path).size(); ++i)
    out.push_back(as_count(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> as_numbers(const json &v, const std::string &path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < as_array(v, path).size(); ++i)
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

spin::state_spec parse_state(const json &j, const std::string &path) {
  expect_object(j, path, {"kind", "spins"});
  spin::state_spec s;
  const auto kind = as_string(require(j, path, "kind"), join(path, "kind"));
  if (kind == "lz_sum")
    s.type = spin::state_spec::kind::lz_sum;
  else if (kind == "singlet")
    s.type = spin::state_spec::kind::singlet;
  else
    fail(join(path, "kind"), "expected lz_sum or singlet, got '" + kind + "'");
  s.spins = as_indices(require(j, path, "spins"), join(path, "spins"));
  return s;
}

void parse_spin_system(const json &j, const std::string &path, bench_config &c) {
  expect_object(j, path, {"isotopes", "magnet_field", "offsets_ppm", "couplings"});
  const auto &iso = as_array(require(j, path, "isotopes"), join(path, "isotopes"));
  for (std::size_t i = 0; i < iso.size(); ++i)
    c.isotopes.push_back(as_string(iso[i], join(path, "isotopes") + "[" + std::to_string(i) + "]"));
  c.magnet_field = as_number(require(j, path, "magnet_field"), join(path, "magnet_field"));
  if (const json *v = find(j, "offsets_ppm")) c.offsets_ppm = as_numbers(*v, join(path, "offsets_ppm"));
  if (const json *v = find(j, "couplings")) {
    const auto base = join(path, "couplings");
    for (std::size_t i = 0; i < as_array(*v, base).size(); ++i) {
      const auto p = base + "[" + std::to_string(i) + "]";
      expect_object((*v)[i], p, {"spins", "hz"});
      const auto spins = as_indices(require((*v)[i], p, "spins"), join(p, "spins"));
      if (spins.size() != 2) fail(join(p, "spins"), "expected two spin indices");
      c.couplings.push_back({spins[0], spins[1], as_number(require((*v)[i], p, "hz"), join(p, "hz"))});
    }
  }
}

void parse_controls(const json &j, const std::string &path, bench_config &c) {
  expect_object(j, path, {"channels", "slices", "duration", "nominal_power_hz", "initial_guess",
                          "ensemble_scalings"});
  const auto base = join(path, "channels");
  const auto &channels = as_array(require(j, path, "channels"), base);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto p = base + "[" + std::to_string(i) + "]";
    expect_object(channels[i], p, {"name", "spins", "axis"});
    spin::control_channel ch;
    ch.name = as_string(require(channels[i], p, "name"), join(p, "name"));
    ch.spins = as_indices(require(channels[i], p, "spins"), join(p, "spins"));
    const auto ax = as_string(require(channels[i], p, "axis"), join(p, "axis"));
    if (ax == "x")
      ch.ax = spin::axis::x;
    else if (ax == "y")
      ch.ax = spin::axis::y;
    else
      fail(join(p, "axis"), "expected x or y, got '" + ax + "'");
    c.channels.push_back(std::move(ch));
  }
  c.slices = as_count(require(j, path, "slices"), join(path, "slices"));
  c.duration = as_number(require(j, path, "duration"), join(path, "duration"));
  c.nominal_power_hz =
      as_number(require(j, path, "nominal_power_hz"), join(path, "nominal_power_hz"));
  if (const json *g = find(j, "initial_guess")) {
    const auto p = join(path, "initial_guess");
    expect_object(*g, p, {"kind", "fraction"});
    if (const json *k = find(*g, "kind")) {
      const auto kind = as_string(*k, join(p, "kind"));
      if (kind != "uniform") fail(join(p, "kind"), "only 'uniform' is supported");
    }
    if (const json *f = find(*g, "fraction")) c.guess_fraction = as_number(*f, join(p, "fraction"));
  }
  if (const json *e = find(j, "ensemble_scalings")) {
    const auto p = join(path, "ensemble_scalings");
    if (e->is_array()) {
      c.ensemble_scalings = as_numbers(*e, p);
    } else {
      expect_object(*e, p, {"min", "max", "count"});
      const double lo = as_number(require(*e, p, "min"), join(p, "min"));
      const double hi = as_number(require(*e, p, "max"), join(p, "max"));
      const auto count = as_count(require(*e, p, "count"), join(p, "count"));
      if (count < 1) fail(join(p, "count"), "must be at least 1");
      c.ensemble_scalings.clear();
      for (std::uint64_t i = 0; i < count; ++i)
        c.ensemble_scalings.push_back(
            count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
  }
}

void parse_penalties(const json &j, const std::string &path, bench_config &c) {
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const json &e = j[i];
    expect_object(e, p, {"kind", "weight", "upper_hz", "lower_hz", "order"});
    penalty_entry pe;
    const auto kind = as_string(require(e, p, "kind"), join(p, "kind"));
    if (kind == "norm_square") {
      pe.kind = penalty_kind::norm_square;
    } else if (kind == "derivative_norm_square") {
      pe.kind = penalty_kind::derivative_norm_square;
      if (const json *o = find(e, "order")) pe.diff_order = static_cast<int>(as_count(*o, join(p, "order")));
    } else if (kind == "spillout") {
      pe.kind = penalty_kind::spillout;
      pe.upper_hz = as_number(require(e, p, "upper_hz"), join(p, "upper_hz"));
      pe.lower_hz = as_number(require(e, p, "lower_hz"), join(p, "lower_hz"));
    } else {
      fail(join(p, "kind"), "unknown penalty kind '" + kind + "'");
    }
    if (pe.kind != penalty_kind::spillout && (find(e, "upper_hz") || find(e, "lower_hz")))
      fail(p, "bounds are only valid for spillout penalties");
    if (pe.kind != penalty_kind::derivative_norm_square && find(e, "order"))
      fail(join(p, "order"), "only valid for derivative_norm_square");
    pe.weight = as_number(require(e, p, "weight"), join(p, "weight"));
    c.penalties.push_back(pe);
  }
}

void parse_optimizer(const json &j, const std::string &path, bench_config &c) {
  expect_object(j, path, {"method", "grad_tol", "max_iterations", "trajectory_budget",
                          "target_fidelity", "lbfgs_memory", "adaptive_initial_step",
                          "regularizer", "line_search"});
  auto &o = c.optimizer;
  if (const json *v = find(j, "method")) {
    try {
      o.algorithm = optim::parse_method(as_string(*v, join(path, "method")));
    } catch (const config_error &) {
      throw;
    } catch (const invalid_input &e) {
      fail(join(path, "method"), e.what());
    }
  }
  if (const json *v = find(j, "grad_tol")) o.grad_tol = as_number(*v, join(path, "grad_tol"));
  if (const json *v = find(j, "max_iterations"))
    o.max_iterations = as_count(*v, join(path, "max_iterations"));
  if (const json *v = find(j, "trajectory_budget"))
    o.trajectory_budget = as_count(*v, join(path, "trajectory_budget"));
  if (const json *v = find(j, "target_fidelity"); v && !v->is_null())
    c.target_fidelity = as_number(*v, join(path, "target_fidelity"));
  if (const json *v = find(j, "lbfgs_memory"))
    o.lbfgs_memory = as_count(*v, join(path, "lbfgs_memory"));
  if (const json *v = find(j, "adaptive_initial_step"))
    o.adaptive_initial_step = as_bool(*v, join(path, "adaptive_initial_step"));
  if (const json *r = find(j, "regularizer")) {
    const auto p = join(path, "regularizer");
    expect_object(*r, p, {"delta", "phi", "alpha_max", "cond_power", "machine_eps", "trm_variant",
                          "alpha_growth"});
    auto &reg = o.regularizer;
    if (const json *v = find(*r, "delta")) reg.delta = as_number(*v, join(p, "delta"));
    if (const json *v = find(*r, "phi")) reg.phi = as_number(*v, join(p, "phi"));
    if (const json *v = find(*r, "alpha_max")) reg.alpha_max = as_number(*v, join(p, "alpha_max"));
    if (const json *v = find(*r, "cond_power"))
      reg.cond_power = static_cast<int>(as_count(*v, join(p, "cond_power")));
    if (const json *v = find(*r, "machine_eps")) reg.machine_eps = as_number(*v, join(p, "machine_eps"));
    if (const json *v = find(*r, "alpha_growth")) reg.allow_alpha_growth = as_bool(*v, join(p, "alpha_growth"));
    if (const json *v = find(*r, "trm_variant")) {
      const auto name = as_string(*v, join(p, "trm_variant"));
      if (name == "iterative")
        reg.trm = optim::trm_variant::iterative;
      else if (name == "eigen_shift")
        reg.trm = optim::trm_variant::eigen_shift;
      else
        fail(join(p, "trm_variant"), "expected iterative or eigen_shift");
    }
  }
  if (const json *l = find(j, "line_search")) {
    const auto p = join(path, "line_search");
    expect_object(*l, p, {"c1", "c2", "max_evals"});
    auto &ls = o.line_search;
    if (const json *v = find(*l, "c1")) ls.c1 = as_number(*v, join(p, "c1"));
    if (const json *v = find(*l, "c2")) ls.c2 = as_number(*v, join(p, "c2"));
    if (const json *v = find(*l, "max_evals")) ls.max_evals = as_count(*v, join(p, "max_evals"));
  }
}

void parse_output(const json &j, const std::string &path, bench_config &c) {
  expect_object(j, path, {"directory", "seed", "workers", "fidelity_norm"});
  if (const json *v = find(j, "directory")) c.output_dir = as_string(*v, join(path, "directory"));
  if (const json *v = find(j, "seed")) c.seed = as_count(*v, join(path, "seed"));
  if (const json *v = find(j, "workers")) c.workers = static_cast<unsigned>(as_count(*v, join(path, "workers")));
  if (const json *v = find(j, "fidelity_norm")) c.fidelity_norm = as_number(*v, join(path, "fidelity_norm"));
}

}  // namespace

void bench_config::validate() const {
  if (isotopes.empty()) fail("spin_system.isotopes", "at least one spin required");
  if (!(magnet_field > 0.0)) fail("spin_system.magnet_field", "must be positive");
  if (!offsets_ppm.empty() && offsets_ppm.size() != isotopes.size())
    fail("spin_system.offsets_ppm", "expected one offset per spin");
  for (const auto &cp : couplings)
    if (cp.first == cp.second || cp.first >= isotopes.size() || cp.second >= isotopes.size())
      fail("spin_system.couplings", "coupling references invalid spins");
  if (channels.empty()) fail("controls.channels", "at least one channel required");
  for (std::size_t i = 0; i < channels.size(); ++i)
    for (auto sp : channels[i].spins)
      if (sp >= isotopes.size())
        fail("controls.channels[" + std::to_string(i) + "].spins", "references an unknown spin");
  for (const auto *st : {&initial, &target})
    for (auto sp : st->spins)
      if (sp >= isotopes.size())
        fail(st == &initial ? "states.initial.spins" : "states.target.spins",
             "references an unknown spin");
  if (slices < 1) fail("controls.slices", "must be at least 1");
  if (!(duration > 0.0)) fail("controls.duration", "must be positive");
  if (!(nominal_power_hz > 0.0)) fail("controls.nominal_power_hz", "must be positive");
  if (!(guess_fraction >= 0.0)) fail("controls.initial_guess.fraction", "must be non-negative");
  if (ensemble_scalings.empty()) fail("controls.ensemble_scalings", "must be nonempty");
  for (double s : ensemble_scalings)
    if (!(s > 0.0)) fail("controls.ensemble_scalings", "scalings must be positive");
  for (const auto &p : penalties) {
    if (!(p.weight >= 0.0)) fail("penalties", "weights must be non-negative");
    if (p.kind == penalty_kind::spillout && p.upper_hz < p.lower_hz)
      fail("penalties", "spillout upper bound below lower bound");
    if (p.kind == penalty_kind::derivative_norm_square && p.diff_order != 1 && p.diff_order != 2)
      fail("penalties", "derivative order must be 1 or 2");
  }
  if (workers < 1) fail("output.workers", "must be at least 1");
  if (!(fidelity_norm > 0.0)) fail("output.fidelity_norm", "must be positive");
  try {
    optimizer.validate();
  } catch (const config_error &) {
    throw;
  } catch (const invalid_input &e) {
    fail("optimizer", e.what());
  }
}

std::vector<std::string> preset_names() { return {"hcf", "singlet"}; }

json preset_json(std::string_view name) {
  if (name == "hcf") return json::parse(hcf_preset);
  if (name == "singlet") return json::parse(singlet_preset);
  throw config_error("unknown preset '" + std::string(name) + "' (expected hcf or singlet)");
}

bench_config parse_config(const json &doc) {
  expect_object(doc, "", {"name", "spin_system", "states", "controls", "penalties", "optimizer",
                          "output"});
  bench_config c;
  if (const json *v = find(doc, "name")) c.name = as_string(*v, "name");
  parse_spin_system(require(doc, "", "spin_system"), "spin_system", c);
  const json &states = require(doc, "", "states");
  expect_object(states, "states", {"initial", "target"});
  c.initial = parse_state(require(states, "states", "initial"), "states.initial");
  c.target = parse_state(require(states, "states", "target"), "states.target");
  parse_controls(require(doc, "", "controls"), "controls", c);
  if (const json *v = find(doc, "penalties")) parse_penalties(*v, "penalties", c);
  if (const json *v = find(doc, "optimizer")) parse_optimizer(*v, "optimizer", c);
  if (const json *v = find(doc, "output")) parse_output(*v, "output", c);
  c.validate();
  return c;
}

bench_config load_config(const std::optional<std::filesystem::path> &path,
                         const std::optional<std::string> &preset) {
  if (!path && !preset) throw config_error("either a config file or a preset is required");
  json doc = preset ? preset_json(*preset) : json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw config_error(path->string() + ": cannot open file");
    json patch;
    try {
      patch = json::parse(in);
    } catch (const json::parse_error &e) {
      throw config_error(path->string() + ": " + e.what());
    }
    if (preset)
      doc.merge_patch(patch);
    else
      doc = std::move(patch);
  }
  return parse_config(doc);
}

spin::spin_system build_spin_system(const bench_config &config) {
  spin::spin_system sys;
  sys.isotopes = config.isotopes;
  sys.magnet_field = config.magnet_field;
  for (std::size_t i = 0; i < config.offsets_ppm.size(); ++i)
    sys.offsets_hz.push_back(
        spin::ppm_to_hz(config.isotopes[i], config.magnet_field, config.offsets_ppm[i]));
  for (const auto &cp : config.couplings) sys.set_coupling(cp.first, cp.second, cp.hz);
  sys.validate();
  return sys;
}

control_problem build_problem(const bench_config &config) {
  config.validate();
  const auto sys = build_spin_system(config);
  control_problem p;
  p.drift = spin::drift_generator(sys);
  p.controls = spin::build_controls(sys, config.channels);
  const double scale = 2.0 * std::numbers::pi * config.nominal_power_hz;
  for (auto &h : p.controls) h *= scale;
  p.rho0 = spin::build_state(sys, config.initial);
  p.target = spin::build_state(sys, config.target);
  p.slices = config.slices;
  p.dt = config.dt();
  p.ensemble_scalings = config.ensemble_scalings;

  const std::size_t k = config.channels.size();
  const std::size_t n = k * config.slices;
  const auto size = static_cast<Eigen::Index>(n);
  for (const auto &pe : config.penalties) {
    penalty_spec spec;
    spec.kind = pe.kind;
    switch (pe.kind) {
      case penalty_kind::norm_square:
        spec.weights = vec::Constant(size, pe.weight);
        break;
      case penalty_kind::derivative_norm_square:
        spec.transform = channelwise_diff_matrix(k, config.slices, pe.diff_order, 1.0);
        spec.weights = vec::Constant(spec.transform.rows(), pe.weight);
        break;
      case penalty_kind::spillout:
        spec.weights = vec::Constant(size, pe.weight);
        spec.upper = vec::Constant(size, pe.upper_hz / config.nominal_power_hz);
        spec.lower = vec::Constant(size, pe.lower_hz / config.nominal_power_hz);
        break;
    }
    p.penalties.push_back(std::move(spec));
  }
  p.validate();
  return p;
}

vec initial_guess(const bench_config &config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> dist(-config.guess_fraction, config.guess_fraction);
  vec x(static_cast<Eigen::Index>(config.channels.size() * config.slices));
  for (auto &v : x) v = dist(rng);
  return x;
}

}  // namespace grape::bench
