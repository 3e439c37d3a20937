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
#include <limits>
#include <optional>

#include "grape/types.hpp"

// Hessian regularisation for Newton-Raphson steps on a minimised objective.
namespace grape::optim {

enum class trm_variant {
  iterative,    // sigma from the Frobenius-norm trial value, doubled until Cholesky succeeds
  eigen_shift,  // sigma = max(0, delta - lambda_min) from an explicit eigendecomposition
};

struct regularizer_settings {
  double delta = 1.0;     // eigen_shift floor on the smallest eigenvalue
  double phi = 0.9;       // alpha damping factor, 0 < phi < 1
  double alpha_max = 1.0; // upper bound on the RFO scaling alpha
  int cond_power = 3;     // line-search interpolation degree n in the eps^(-1/n) cap
  double machine_eps = std::numeric_limits<double>::epsilon();
  trm_variant trm = trm_variant::iterative;
  // Grow alpha by 1/phi (up to alpha_max) while the condition number stays
  // below the cap. Off by default.
  bool allow_alpha_growth = false;
  std::size_t max_alpha_steps = 400;

  double condition_cap() const;
  void validate() const;
};

// Lower-triangular L with h = L L^T, or nullopt if h is not positive definite.
// Throws invalid_input if h is asymmetric beyond 1e-8 ||h||_F.
std::optional<mat> try_cholesky(const mat &h);

// Trial shift: ||h||_F - min diag if min diag < 0, else ||h||_F.
double trm_trial_shift(const mat &h);

struct trm_result {
  mat hessian;    // positive definite
  double sigma = 0.0;
  std::size_t attempts = 0;
};

trm_result trm_regularize(const mat &h, const regularizer_settings &settings);

struct rfo_result {
  vec step;
  mat regularized;        // top-left block of the regularised augmented Hessian
  double sigma = 0.0;     // shift applied to the augmented Hessian
  double alpha = 1.0;     // final scaling
  double alpha0 = 1.0;    // initial scaling, after clamping to alpha_max
  bool alpha_clamped = false;
  double condition = 0.0; // condition number of `regularized`
  std::size_t damping_steps = 0;
};

// Augmented Hessian [[a^2 h, a g], [a g^T, 0]].
mat augmented_hessian(const mat &h, const vec &g, double alpha);

// Rational function optimisation step: shift the augmented Hessian by the
// magnitude of its most negative eigenvalue, scale back by 1/alpha^2 and take
// the Newton step with the top-left block. alpha starts at 1/sqrt|lambda_min|
// (clamped to alpha_max) and is damped by phi while the regularised block's
// condition number exceeds eps^(-1/n).
rfo_result rfo_step(const mat &h, const vec &g, const regularizer_settings &settings);

// The same step at a fixed scaling alpha, without damping.
rfo_result rfo_step_at(const mat &h, const vec &g, double alpha,
                       double machine_eps = std::numeric_limits<double>::epsilon());

// Condition number lambda_max / lambda_min of a symmetric matrix
// (infinity unless positive definite).
double condition_number(const mat &h);

}  // namespace grape::optim
