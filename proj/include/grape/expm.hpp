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

#include "grape/types.hpp"

namespace grape {

// Diagonal Pade coefficients b_0..b_13 of the degree-13 approximant.
extern const double pade13_coefficients[14];

// Largest 1-norm for which the unscaled degree-13 approximant is accurate to
// double precision.
inline constexpr double pade13_theta = 5.371920351148152;

// Number of squarings used for a matrix of the given 1-norm.
int expm_squarings(double one_norm);

// Matrix exponential by scaling and squaring with the degree-13 diagonal
// Pade approximant. Throws invalid_input for non-square or non-finite input.
cx_mat expm(const cx_mat &a);

}  // namespace grape
