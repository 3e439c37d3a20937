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
#include <span>
#include <vector>

#include "grape/types.hpp"

namespace grape {

// Unordered channel pair, stored with first <= second.
struct channel_pair {
  std::size_t first = 0;
  std::size_t second = 0;
};

// All pairs (i, j) with i <= j for the given channel count, row-major.
std::vector<channel_pair> upper_triangle_pairs(std::size_t channels);

// How the auxiliary block exponentials are evaluated.
//
// dense      forms each [[H, Hk], [0, H]] and [[H, Hi, 0], [0, H, Hj], [0, 0, H]]
//            block matrix explicitly and calls expm() on it.
// structured runs the same scaling-and-squaring Pade recurrence on the block
//            upper-triangular algebra, so blocks shared between channels and
//            pairs (the diagonal propagator, each channel's superdiagonal) are
//            computed once per slice. One common squaring count, chosen from
//            the largest augmented 1-norm of the slice, is used for every block.
enum class aux_method { structured, dense };

// Propagator of one time slice with its control derivatives.
struct slice_propagators {
  cx_mat propagator;               // P = exp(-i H dt)
  std::vector<cx_mat> first;       // dP/dc_k, one per channel
  std::vector<channel_pair> pairs;
  std::vector<cx_mat> second;      // d2P/dc_i dc_j = A_ij + A_ji, per pair
  double dt = 0.0;

  // d2P for (i, j) in either order; throws if the pair was not requested.
  const cx_mat &second_derivative(std::size_t i, std::size_t j) const;
};

// P, dP and (for order 2) d2P of exp(-i generator dt) with respect to the
// amplitudes multiplying `controls`. The generator already contains the drift,
// the control terms for this slice and +iR. First derivatives are read from
// the superdiagonal blocks; for order 2 they come out of the same 3x3
// exponentials as the second derivatives.
slice_propagators slice_propagator_with_derivs(const cx_mat &generator,
                                               std::span<const cx_mat> controls, double dt,
                                               int order,
                                               std::span<const channel_pair> pairs,
                                               aux_method method = aux_method::structured);

// exp(-i [[H, Hk], [0, H]] dt), formed and exponentiated as one dense matrix.
cx_mat first_order_block_expm(const cx_mat &generator, const cx_mat &control, double dt);

// exp(-i [[H, Hi, 0], [0, H, Hj], [0, 0, H]] dt) as one dense matrix.
cx_mat second_order_block_expm(const cx_mat &generator, const cx_mat &control_i,
                               const cx_mat &control_j, double dt);

}  // namespace grape
