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
#include <optional>
#include <vector>

#include "grape/expm_cache.hpp"
#include "grape/penalty.hpp"
#include "grape/propagator_derivs.hpp"
#include "grape/types.hpp"

// GRAPE fidelity functional with exact first and second derivatives.
//
//   J(c) = Re <target| P_N ... P_1 |rho0> - J_RF(c)
//   P_n  = exp(-i (H0 + sum_k c_{k,n} H_k + iR) dt)
//
// For an ensemble the overlap term is averaged over members whose control
// amplitudes are scaled by s_m; penalties act once on the nominal sequence.
namespace grape {

// K x N amplitudes stored slice-major: flat index n*K + k (0-based).
class control_sequence {
 public:
  control_sequence() = default;
  control_sequence(std::size_t channels, std::size_t slices);
  control_sequence(std::size_t channels, std::size_t slices, vec flat);
  static control_sequence from_matrix(const mat &channels_by_slices);

  std::size_t channels() const { return channels_; }
  std::size_t slices() const { return slices_; }
  std::size_t size() const { return channels_ * slices_; }

  static std::size_t index(std::size_t channel, std::size_t slice, std::size_t channels) {
    return slice * channels + channel;
  }
  double operator()(std::size_t channel, std::size_t slice) const {
    return values_[static_cast<Eigen::Index>(index(channel, slice, channels_))];
  }
  double &operator()(std::size_t channel, std::size_t slice) {
    return values_[static_cast<Eigen::Index>(index(channel, slice, channels_))];
  }

  const vec &flat() const { return values_; }
  vec &flat() { return values_; }
  mat as_matrix() const;

 private:
  std::size_t channels_ = 0;
  std::size_t slices_ = 0;
  vec values_;
};

struct control_problem {
  cx_mat drift;                  // H0 + iR
  std::vector<cx_mat> controls;  // H_k
  cx_vec rho0;
  cx_vec target;
  double dt = 0.0;
  std::size_t slices = 0;
  std::vector<penalty_spec> penalties;
  std::vector<double> ensemble_scalings{1.0};

  std::size_t channels() const { return controls.size(); }
  std::size_t variables() const { return channels() * slices; }
  std::size_t dimension() const { return static_cast<std::size_t>(drift.rows()); }

  // Throws invalid_input on inconsistent shapes or parameters.
  void validate() const;
};

struct fidelity_report {
  double value = 0.0;    // J, overlap minus penalties
  double penalty = 0.0;  // J_RF
  vec gradient;
  std::optional<mat> hessian;
  std::size_t trajectory_evals = 0;
  // ||H - H^T||_F / ||H||_F before symmetrisation; only nonzero when both
  // triangles of the cross-slice blocks are assembled independently.
  double asymmetry = 0.0;

  double overlap() const { return value + penalty; }
};

struct eval_options {
  unsigned workers = 1;
  aux_method method = aux_method::structured;
  // Assemble the n < m cross-slice blocks by a separate backward sweep
  // instead of mirroring the n > m ones (diagnostic, doubles that cost).
  bool independent_lower_half = false;
  // Optional cache for the slice propagators of fidelity().
  cache::expm_cache *cache = nullptr;
};

fidelity_report fidelity(const control_problem &problem, const control_sequence &seq,
                         const eval_options &options = {});
fidelity_report fidelity_gradient(const control_problem &problem, const control_sequence &seq,
                                  const eval_options &options = {});
fidelity_report fidelity_hessian(const control_problem &problem, const control_sequence &seq,
                                 const eval_options &options = {});

// Slice generator H0 + sum_k c_{k,n} H_k (+iR already in the drift).
cx_mat slice_generator(const control_problem &problem, const control_sequence &seq,
                       std::size_t slice, double scaling = 1.0);

}  // namespace grape
