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
#include <optional>

#include "grape/optim/objective.hpp"

namespace grape::optim {

struct line_search_settings {
  double c1 = 1e-4;         // sufficient decrease
  double c2 = 0.9;          // curvature
  std::size_t max_evals = 20;
  double expansion = 9.0;   // bracketing extrapolation limit tau
  double max_step = 1e10;

  void validate() const;
};

enum class line_search_status {
  wolfe,      // accepted point satisfies both strong Wolfe inequalities
  max_evals,  // evaluation limit hit; best decreasing point returned
  budget,     // caller refused further evaluations; best decreasing point returned
  stalled,    // bracket collapsed below floating-point resolution
};

struct line_search_result {
  line_search_status status = line_search_status::wolfe;
  double step = 0.0;                  // 0 when no decreasing point was found
  std::optional<evaluation> point;    // evaluation at x + step d
  double slope = 0.0;                 // <grad f(x + step d), d>
  std::size_t evals = 0;
  std::size_t cost = 0;               // summed evaluation costs
};

// Strong Wolfe line search: bracketing with cubic extrapolation, then
// sectioning with safeguarded cubic interpolation. f0 and slope0 describe the
// start point; `order` is forwarded to the objective at every trial so the
// accepted point carries whatever derivatives the caller needs next.
// `may_evaluate`, if set, is asked before every trial. Throws invalid_input if
// d is not a descent direction.
line_search_result line_search(const objective_fn &f, const vec &x, const vec &d, double f0,
                               double slope0, int order, double initial_step,
                               const line_search_settings &settings,
                               const std::function<bool()> &may_evaluate = {});

// Minimiser of the cubic through (a, fa, ga) and (b, fb, gb), or nullopt if
// the interpolant has no finite minimiser.
std::optional<double> cubic_minimizer(double a, double fa, double ga, double b, double fb,
                                      double gb);

}  // namespace grape::optim
