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

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grape/optim/line_search.hpp"
#include "grape/optim/objective.hpp"
#include "grape/optim/regularize.hpp"

namespace grape::optim {

enum class method { grad_descent, lbfgs, bfgs, newton_trm, newton_rfo };

std::string to_string(method m);
// Throws invalid_input for unknown names.
method parse_method(std::string_view name);
bool uses_hessian(method m);

enum class hessian_fix { cholesky_only, trm, rfo };

struct newton_step {
  vec direction;
  bool regularized = false;  // false when the Hessian was positive definite as is
  double sigma = 0.0;
  double alpha = 1.0;
  double condition = 0.0;    // of the matrix actually inverted
};

// Newton direction for a minimised objective: a plain Newton step if h is
// positive definite, otherwise the step from the selected regulariser.
// cholesky_only throws numerical_error on an indefinite h.
newton_step newton_direction(const mat &h, const vec &g, hessian_fix fix,
                             const regularizer_settings &settings);

struct iteration_record;

struct optimizer_settings {
  method algorithm = method::newton_rfo;
  double grad_tol = 1e-6;
  std::size_t max_iterations = 1000;
  std::size_t trajectory_budget = std::numeric_limits<std::size_t>::max();
  std::optional<double> target_value;  // stop once f <= target
  std::size_t lbfgs_memory = 20;
  // Every line search starts from the unit step. When set, steepest-descent
  // steps instead start from a_{k-1} <g_{k-1}, d_{k-1}> / <g_k, d_k>.
  bool adaptive_initial_step = false;
  regularizer_settings regularizer;
  line_search_settings line_search;
  // Called with every log row as soon as it is appended.
  std::function<void(const iteration_record &)> on_iteration;

  void validate() const;
};

// Row k describes iterate x_k and the step that produced it (row 0 is the
// start point, with NaN step diagnostics).
struct iteration_record {
  std::size_t iteration = 0;
  double value = 0.0;    // f(x_k)
  double penalty = 0.0;
  double grad_inf = 0.0;
  double step_norm = 0.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double condition = std::numeric_limits<double>::quiet_NaN();
  std::size_t trajectories = 0;  // cumulative, including line-search trials
  std::size_t linesearch_evals = 0;
  // Line-search audit: f and <grad f, d> at the start and accepted points.
  double step_length = 0.0;
  double f_start = 0.0;
  double slope_start = 0.0;
  double f_accepted = 0.0;
  double slope_accepted = 0.0;
  bool wolfe = false;
};

struct optim_log {
  std::vector<iteration_record> rows;
  double c1 = 0.0;
  double c2 = 0.0;
};

enum class termination {
  gradient_tolerance,
  target_reached,
  iteration_limit,
  trajectory_budget,
  line_search_failure,
};

std::string to_string(termination t);

struct optim_result {
  vec x;
  evaluation at_x;
  optim_log log;
  termination reason = termination::iteration_limit;
  std::size_t trajectories = 0;
};

optim_result optimize(const objective_fn &f, const vec &x0, const optimizer_settings &settings);

// Checks both strong Wolfe inequalities for a logged step.
bool satisfies_wolfe(const iteration_record &row, double c1, double c2);

}  // namespace grape::optim
