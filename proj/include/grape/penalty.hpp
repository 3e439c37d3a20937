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

#include "grape/types.hpp"

namespace grape {

enum class penalty_kind { norm_square, derivative_norm_square, spillout };

// Penalty on the flattened control vector c.
//
//   norm_square             sum_k w_k c_k^2
//   derivative_norm_square  sum_k w_k [D c]_k^2
//   spillout                sum_k w_k (c_k - u_k)^2 [c_k > u_k]
//                             + w_k (c_k - l_k)^2 [c_k < l_k]
//
// The spillout gates are strict, so a point exactly on a bound is inside.
struct penalty_spec {
  penalty_kind kind = penalty_kind::norm_square;
  vec weights;    // length n, or rows(D) for the derivative kind
  vec upper;      // spillout only
  vec lower;      // spillout only
  mat transform;  // D, derivative kind only

  // Throws invalid_input unless these settings are usable on vectors of length n.
  void validate(std::size_t n) const;
};

struct penalty_value {
  double value = 0.0;
  vec gradient;
  mat hessian;
};

penalty_value penalty_eval(const penalty_spec &spec, const vec &controls);

// Finite-difference derivative matrix for a sequence of n samples spaced dt.
// order 1: forward differences, last row zero.
// order 2: central differences with second-order one-sided end rows.
mat diff_matrix(std::size_t n, int order, double dt = 1.0);

// diff_matrix applied to each channel of a slice-major flattened sequence.
mat channelwise_diff_matrix(std::size_t channels, std::size_t slices, int order, double dt);

}  // namespace grape
