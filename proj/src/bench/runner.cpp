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

#include "grape/bench/runner.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "grape/optim/grape_objective.hpp"

namespace grape::bench {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot write " + path.string());
  return out;
}

void write_waveform(const std::filesystem::path &path, const bench_config &config, const vec &x) {
  auto out = open_output(path);
  out << "# dt_s=" << fmt(config.dt()) << " nominal_power_hz=" << fmt(config.nominal_power_hz)
      << " units=hz\n";
  const std::size_t k = config.channels.size();
  for (std::size_t c = 0; c < k; ++c) out << (c ? "," : "") << config.channels[c].name;
  out << '\n';
  for (std::size_t n = 0; n < config.slices; ++n) {
    for (std::size_t c = 0; c < k; ++c)
      out << (c ? "," : "")
          << fmt(x[static_cast<Eigen::Index>(n * k + c)] * config.nominal_power_hz);
    out << '\n';
  }
}

void write_summary(const std::filesystem::path &path, const bench_config &config,
                   const run_outcome &o) {
  const auto &r = o.result;
  nlohmann::ordered_json s;
  s["name"] = config.name;
  s["method"] = optim::to_string(config.optimizer.algorithm);
  s["seed"] = config.seed;
  s["workers"] = config.workers;
  s["termination"] = optim::to_string(r.reason);
  s["iterations"] = r.log.rows.empty() ? 0 : r.log.rows.back().iteration;
  s["trajectories"] = r.trajectories;
  s["fidelity"] = o.fidelity;
  s["penalty"] = o.penalty;
  s["infidelity"] = 1.0 - o.fidelity;
  s["fidelity_norm"] = config.fidelity_norm;
  s["normalized_infidelity"] = 1.0 - o.fidelity / config.fidelity_norm;
  s["grad_inf_norm"] = r.log.rows.empty() ? 0.0 : r.log.rows.back().grad_inf;
  auto out = open_output(path);
  out << s.dump(2) << '\n';
}

}  // namespace

std::string convergence_row(const optim::iteration_record &row) {
  const double j = -row.value;
  std::string line = std::to_string(row.iteration);
  line += ',' + std::to_string(row.trajectories);
  line += ',' + fmt(j);
  line += ',' + fmt(row.penalty);
  line += ',' + fmt(1.0 - j);
  line += ',' + fmt(row.grad_inf);
  line += ',' + fmt(row.sigma);
  line += ',' + fmt(row.alpha);
  line += ',' + fmt(row.condition);
  line += ',' + std::to_string(row.linesearch_evals);
  return line;
}

run_outcome run(const bench_config &config, const std::filesystem::path &directory) {
  const control_problem problem = build_problem(config);
  std::filesystem::create_directories(directory);

  auto csv = open_output(directory / "convergence.csv");
  csv << convergence_header << '\n';

  optim::optimizer_settings settings = config.optimizer;
  if (config.target_fidelity) settings.target_value = -*config.target_fidelity;
  settings.on_iteration = [&csv](const optim::iteration_record &row) {
    csv << convergence_row(row) << '\n';
    csv.flush();
  };

  eval_options eval;
  eval.workers = config.workers;
  const auto objective = optim::make_grape_objective(problem, eval);

  run_outcome o;
  o.directory = directory;
  o.result = optim::optimize(objective, initial_guess(config), settings);
  o.fidelity = -o.result.at_x.value;
  o.penalty = o.result.at_x.penalty;
  write_waveform(directory / "waveform.csv", config, o.result.x);
  write_summary(directory / "summary.json", config, o);
  return o;
}

std::optional<std::size_t> trajectories_to_reach(const optim::optim_log &log, double threshold) {
  for (const auto &row : log.rows)
    if (-row.value >= threshold) return row.trajectories;
  return std::nullopt;
}

std::vector<compare_row> compare(const bench_config &config,
                                 const std::vector<optim::method> &methods,
                                 const std::vector<double> &thresholds) {
  if (methods.empty()) throw config_error("methods: at least one method required");
  std::vector<compare_row> rows;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    bench_config c = config;
    c.optimizer.algorithm = methods[i];
    const auto dir = config.output_dir / (std::to_string(i) + "_" + optim::to_string(methods[i]));
    const auto o = run(c, dir);
    compare_row row;
    row.method = optim::to_string(methods[i]);
    for (double t : thresholds) row.trajectories_to.push_back(trajectories_to_reach(o.result.log, t));
    row.final_fidelity = o.fidelity;
    row.iterations = o.result.log.rows.back().iteration;
    row.trajectories = o.result.trajectories;
    row.termination = optim::to_string(o.result.reason);
    rows.push_back(std::move(row));
  }
  std::filesystem::create_directories(config.output_dir);
  auto out = open_output(config.output_dir / "compare.csv");
  out << "method";
  for (double t : thresholds) out << ",trajectories_to_" << fmt(t);
  out << ",final_fidelity,iterations,trajectories,termination\n";
  for (const auto &r : rows) {
    out << r.method;
    for (const auto &t : r.trajectories_to) out << ',' << (t ? std::to_string(*t) : "");
    out << ',' << fmt(r.final_fidelity) << ',' << r.iterations << ',' << r.trajectories << ','
        << r.termination << '\n';
  }
  return rows;
}

void print_compare(std::ostream &out, const std::vector<compare_row> &rows,
                   const std::vector<double> &thresholds) {
  out << std::left << std::setw(14) << "method";
  for (double t : thresholds) out << std::setw(12) << ("F>=" + fmt(t));
  out << std::setw(22) << "final_fidelity" << std::setw(8) << "iters" << std::setw(8) << "traj"
      << "termination\n";
  for (const auto &r : rows) {
    out << std::setw(14) << r.method;
    for (const auto &t : r.trajectories_to) out << std::setw(12) << (t ? std::to_string(*t) : "-");
    out << std::setw(22) << fmt(r.final_fidelity) << std::setw(8) << r.iterations << std::setw(8)
        << r.trajectories << r.termination << '\n';
  }
}

}  // namespace grape::bench
