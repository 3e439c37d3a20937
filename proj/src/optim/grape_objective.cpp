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

#include "grape/optim/grape_objective.hpp"

namespace grape::optim {

objective_fn make_grape_objective(const control_problem &problem, eval_options options) {
  problem.validate();
  return [&problem, options](const vec &x, int order) {
    const control_sequence seq(problem.channels(), problem.slices, x);
    fidelity_report r;
    switch (order) {
      case 0: r = fidelity(problem, seq, options); break;
      case 1: r = fidelity_gradient(problem, seq, options); break;
      case 2: r = fidelity_hessian(problem, seq, options); break;
      default: throw invalid_input("derivative order must be 0, 1 or 2");
    }
    evaluation e;
    e.value = -r.value;
    e.penalty = r.penalty;
    e.cost = r.trajectory_evals;
    if (order >= 1) e.gradient = -r.gradient;
    if (order >= 2) e.hessian = -*r.hessian;
    return e;
  };
}

}  // namespace grape::optim
