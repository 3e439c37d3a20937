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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "grape/bench/config.hpp"
#include "grape/bench/runner.hpp"
#include "grape/expm.hpp"
#include "grape/optim/grape_objective.hpp"
#include "grape/optim/optimizer.hpp"
#include "grape/optim/regularize.hpp"
#include "grape/propagator_derivs.hpp"

namespace py = pybind11;
using namespace grape;

namespace {

// A configured benchmark problem with its assembled control problem.
struct problem_handle {
  bench::bench_config config;
  control_problem problem;

  explicit problem_handle(bench::bench_config c)
      : config(std::move(c)), problem(bench::build_problem(config)) {}
};

problem_handle make_problem(const std::string &config_json, const std::string &preset) {
  nlohmann::json doc = preset.empty() ? nlohmann::json::object() : bench::preset_json(preset);
  if (!config_json.empty()) doc.merge_patch(nlohmann::json::parse(config_json));
  return problem_handle(bench::parse_config(doc));
}

py::dict report_dict(const fidelity_report &r) {
  py::dict d;
  d["value"] = r.value;
  d["penalty"] = r.penalty;
  d["overlap"] = r.overlap();
  d["trajectory_evals"] = r.trajectory_evals;
  if (r.gradient.size()) d["gradient"] = r.gradient;
  if (r.hessian) d["hessian"] = *r.hessian;
  return d;
}

py::dict record_dict(const optim::iteration_record &row) {
  py::dict d;
  d["iteration"] = row.iteration;
  d["fidelity"] = -row.value;
  d["penalty"] = row.penalty;
  d["grad_inf_norm"] = row.grad_inf;
  d["step_norm"] = row.step_norm;
  d["sigma"] = row.sigma;
  d["alpha"] = row.alpha;
  d["cond_estimate"] = row.condition;
  d["trajectories"] = row.trajectories;
  d["linesearch_evals"] = row.linesearch_evals;
  d["step_length"] = row.step_length;
  d["wolfe"] = row.wolfe;
  return d;
}

py::dict result_dict(const optim::optim_result &r) {
  py::dict d;
  d["x"] = r.x;
  d["fidelity"] = -r.at_x.value;
  d["penalty"] = r.at_x.penalty;
  d["trajectories"] = r.trajectories;
  d["termination"] = optim::to_string(r.reason);
  py::list log;
  for (const auto &row : r.log.rows) log.append(record_dict(row));
  d["log"] = log;
  bool wolfe = true;
  for (std::size_t i = 1; i < r.log.rows.size(); ++i)
    wolfe = wolfe && optim::satisfies_wolfe(r.log.rows[i], r.log.c1, r.log.c2);
  d["all_steps_wolfe"] = wolfe;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Newton-Raphson GRAPE: propagator derivatives, fidelity, regularised optimisation";

  py::register_exception<invalid_input>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<numerical_error>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("expm", &expm, py::arg("a"), "Matrix exponential (Pade 13, scaling and squaring).");

  m.def(
      "slice_propagators",
      [](const cx_mat &generator, const std::vector<cx_mat> &controls, double dt, int order) {
        const auto pairs = order == 2 ? upper_triangle_pairs(controls.size())
                                      : std::vector<channel_pair>{};
        const auto sp = slice_propagator_with_derivs(generator, controls, dt, order, pairs);
        py::dict d;
        d["propagator"] = sp.propagator;
        d["first"] = sp.first;
        py::dict second;
        for (std::size_t p = 0; p < sp.pairs.size(); ++p)
          second[py::make_tuple(sp.pairs[p].first, sp.pairs[p].second)] = sp.second[p];
        d["second"] = second;
        return d;
      },
      py::arg("generator"), py::arg("controls"), py::arg("dt"), py::arg("order") = 1,
      "exp(-i H dt) with first (and for order 2, second) control derivatives.");

  m.def("preset_names", &bench::preset_names);
  m.def("preset_json", [](const std::string &name) { return bench::preset_json(name).dump(); });

  py::class_<problem_handle>(m, "Problem")
      .def(py::init(&make_problem), py::arg("config_json") = "", py::arg("preset") = "",
           "Build from a JSON document merged over an optional preset.")
      .def_property_readonly("name", [](const problem_handle &p) { return p.config.name; })
      .def_property_readonly("dimension", [](const problem_handle &p) { return p.problem.dimension(); })
      .def_property_readonly("channels", [](const problem_handle &p) { return p.problem.channels(); })
      .def_property_readonly("slices", [](const problem_handle &p) { return p.problem.slices; })
      .def_property_readonly("variables", [](const problem_handle &p) { return p.problem.variables(); })
      .def_property_readonly("dt", [](const problem_handle &p) { return p.problem.dt; })
      .def_property_readonly("ensemble_scalings",
                             [](const problem_handle &p) { return p.problem.ensemble_scalings; })
      .def_property_readonly("drift", [](const problem_handle &p) { return p.problem.drift; })
      .def_property_readonly("controls", [](const problem_handle &p) { return p.problem.controls; })
      .def_property_readonly("rho0", [](const problem_handle &p) { return p.problem.rho0; })
      .def_property_readonly("target", [](const problem_handle &p) { return p.problem.target; })
      .def(
          "initial_guess",
          [](const problem_handle &p, std::uint64_t seed) {
            auto c = p.config;
            c.seed = seed;
            return bench::initial_guess(c);
          },
          py::arg("seed") = 1)
      .def(
          "evaluate",
          [](const problem_handle &p, const vec &x, int order, unsigned workers) {
            const control_sequence seq(p.problem.channels(), p.problem.slices, x);
            eval_options opt;
            opt.workers = workers;
            if (order < 0 || order > 2) throw invalid_input("order must be 0, 1 or 2");
            fidelity_report r;
            {
              py::gil_scoped_release release;
              r = order == 0   ? fidelity(p.problem, seq, opt)
                  : order == 1 ? fidelity_gradient(p.problem, seq, opt)
                               : fidelity_hessian(p.problem, seq, opt);
            }
            return report_dict(r);
          },
          py::arg("x"), py::arg("order") = 0, py::arg("workers") = 1,
          "Fidelity J (order 0), plus gradient (1) and Hessian (2).")
      .def(
          "optimize",
          [](const problem_handle &p, const vec &x0, const std::string &method,
             std::size_t budget, std::optional<double> target, unsigned workers) {
            auto settings = p.config.optimizer;
            settings.algorithm = optim::parse_method(method);
            settings.trajectory_budget = budget;
            if (target) settings.target_value = -*target;
            eval_options opt;
            opt.workers = workers;
            const auto f = optim::make_grape_objective(p.problem, opt);
            optim::optim_result r;
            {
              py::gil_scoped_release release;
              r = optim::optimize(f, x0, settings);
            }
            return result_dict(r);
          },
          py::arg("x0"), py::arg("method") = "newton_rfo", py::arg("trajectory_budget") = 2000,
          py::arg("target_fidelity") = py::none(), py::arg("workers") = 1);

  m.def(
      "run",
      [](const std::string &config_json, const std::string &preset, const std::string &out) {
        const auto p = make_problem(config_json, preset);
        bench::run_outcome o;
        {
          py::gil_scoped_release release;
          o = bench::run(p.config, out);
        }
        return result_dict(o.result);
      },
      py::arg("config_json") = "", py::arg("preset") = "", py::arg("out") = "grape_out",
      "Run one benchmark and write convergence.csv, waveform.csv and summary.json.");

  m.def(
      "rfo_step",
      [](const mat &h, const vec &g) {
        const auto r = optim::rfo_step(h, g, {});
        py::dict d;
        d["step"] = r.step;
        d["regularized"] = r.regularized;
        d["sigma"] = r.sigma;
        d["alpha"] = r.alpha;
        d["condition"] = r.condition;
        return d;
      },
      py::arg("hessian"), py::arg("gradient"));

  m.def(
      "trm_regularize",
      [](const mat &h, const std::string &variant) {
        optim::regularizer_settings s;
        if (variant == "eigen_shift")
          s.trm = optim::trm_variant::eigen_shift;
        else if (variant != "iterative")
          throw invalid_input("variant must be iterative or eigen_shift");
        const auto r = optim::trm_regularize(h, s);
        return py::make_tuple(r.hessian, r.sigma);
      },
      py::arg("hessian"), py::arg("variant") = "iterative");
}
