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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grape/bench/config.hpp"
#include "grape/optim/optimizer.hpp"

namespace grape::bench {

inline constexpr const char *convergence_header =
    "iteration,cumulative_trajectories,fidelity,penalty,infidelity,grad_inf_norm,sigma,alpha,"
    "cond_estimate,linesearch_evals";

// One convergence CSV line (no newline); fidelity is J = -f.
std::string convergence_row(const optim::iteration_record &row);

struct run_outcome {
  optim::optim_result result;
  std::filesystem::path directory;
  double fidelity = 0.0;
  double penalty = 0.0;
};

// Optimises the configured problem from the seeded initial guess and writes
// convergence.csv (streamed), waveform.csv and summary.json to `directory`.
run_outcome run(const bench_config &config, const std::filesystem::path &directory);

struct compare_row {
  std::string method;
  std::vector<std::optional<std::size_t>> trajectories_to;  // per threshold
  double final_fidelity = 0.0;
  std::size_t iterations = 0;
  std::size_t trajectories = 0;
  std::string termination;
};

// Cumulative trajectory count at the first row whose fidelity reaches t.
std::optional<std::size_t> trajectories_to_reach(const optim::optim_log &log, double threshold);

// Runs every method under identical settings; each run writes into
// <output_dir>/<index>_<method>/ and the table goes to <output_dir>/compare.csv.
std::vector<compare_row> compare(const bench_config &config,
                                 const std::vector<optim::method> &methods,
                                 const std::vector<double> &thresholds);

void print_compare(std::ostream &out, const std::vector<compare_row> &rows,
                   const std::vector<double> &thresholds);

}  // namespace grape::bench
