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

#include "grape/grape.hpp"
#include "grape/optim/objective.hpp"

namespace grape::optim {

// Minimised objective f = -J over the flat slice-major amplitude vector.
// The problem must outlive the returned function.
objective_fn make_grape_objective(const control_problem &problem, eval_options options = {});

}  // namespace grape::optim
