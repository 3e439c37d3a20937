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

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grape/bench/runner.hpp"

namespace {

constexpr int exit_config = 1;
constexpr int exit_numerical = 2;

struct common_args {
  std::string config;
  std::string preset;
  std::string method;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App *cmd, common_args &a) {
  cmd->add_option("config", a.config, "JSON configuration file (merged over --preset if both)");
  cmd->add_option("--preset", a.preset, "Built-in problem")->check(CLI::IsMember({"hcf", "singlet"}));
  cmd->add_option("--workers", a.workers, "Threads for propagator and derivative evaluation");
  cmd->add_option("--seed", a.seed, "Seed for the initial guess");
  cmd->add_option("--out", a.out, "Output directory");
}

grape::bench::bench_config load(const common_args &a) {
  std::optional<std::filesystem::path> path;
  std::optional<std::string> preset;
  if (!a.config.empty()) path = a.config;
  if (!a.preset.empty()) preset = a.preset;
  auto config = grape::bench::load_config(path, preset);
  if (!a.method.empty()) config.optimizer.algorithm = grape::optim::parse_method(a.method);
  if (a.workers) config.workers = a.workers;
  if (a.seed) config.seed = *a.seed;
  if (!a.out.empty()) config.output_dir = a.out;
  config.validate();
  return config;
}

std::vector<std::string> split(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Newton-Raphson GRAPE optimal control benchmarks"};
  app.require_subcommand(1);

  common_args run_args;
  auto *run_cmd = app.add_subcommand("run", "Optimise one problem and write logs");
  add_common(run_cmd, run_args);
  run_cmd->add_option("--method", run_args.method,
                      "grad_descent, lbfgs, bfgs, newton_trm or newton_rfo");

  common_args cmp_args;
  std::string methods = "newton_rfo,newton_trm,bfgs,lbfgs,grad_descent";
  std::string thresholds = "0.9,0.99";
  auto *cmp_cmd = app.add_subcommand("compare", "Run several methods on one problem");
  add_common(cmp_cmd, cmp_args);
  cmp_cmd->add_option("--methods", methods, "Comma-separated method list");
  cmp_cmd->add_option("--thresholds", thresholds, "Comma-separated fidelity thresholds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : exit_config;
  }

  try {
    if (*run_cmd) {
      const auto config = load(run_args);
      const auto o = grape::bench::run(config, config.output_dir);
      std::cout << grape::optim::to_string(config.optimizer.algorithm)
                << ": fidelity " << o.fidelity << " after " << o.result.trajectories
                << " trajectories (" << grape::optim::to_string(o.result.reason) << ")\n"
                << "output in " << o.directory.string() << '\n';
    } else {
      const auto config = load(cmp_args);
      std::vector<grape::optim::method> list;
      for (const auto &m : split(methods)) list.push_back(grape::optim::parse_method(m));
      std::vector<double> ts;
      for (const auto &t : split(thresholds)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(t, &used);
        } catch (const std::exception &) {
          used = 0;
        }
        if (used != t.size()) throw grape::bench::config_error("thresholds: bad value '" + t + "'");
        ts.push_back(v);
      }
      const auto rows = grape::bench::compare(config, list, ts);
      grape::bench::print_compare(std::cout, rows, ts);
    }
  } catch (const grape::numerical_error &e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const grape::invalid_input &e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numerical;
  }
  return 0;
}
