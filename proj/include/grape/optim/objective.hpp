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

#include "grape/types.hpp"

namespace grape::optim {

// One evaluation of a minimised objective f. `order` 0, 1 or 2 selects how
// many derivatives are filled; `cost` is the evaluation's trajectory count.
struct evaluation {
  double value = 0.0;
  vec gradient;
  std::optional<mat> hessian;
  double penalty = 0.0;
  std::size_t cost = 0;
};

using objective_fn = std::function<evaluation(const vec &x, int order)>;

}  // namespace grape::optim
