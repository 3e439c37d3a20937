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

#include "grape/penalty.hpp"

#include <string>

namespace grape {

void penalty_spec::validate(std::size_t n) const {
  const auto size = static_cast<Eigen::Index>(n);
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw invalid_input("penalty weights must be finite and nonnegative");
  switch (kind) {
    case penalty_kind::norm_square:
      if (weights.size() != size) throw invalid_input("penalty weight count mismatch");
      break;
    case penalty_kind::derivative_norm_square:
      if (transform.cols() != size)
        throw invalid_input("penalty transform column count mismatch");
      if (weights.size() != transform.rows())
        throw invalid_input("penalty weight count must equal transform rows");
      break;
    case penalty_kind::spillout:
      if (weights.size() != size || upper.size() != size || lower.size() != size)
        throw invalid_input("spillout weight/bound count mismatch");
      if ((upper.array() < lower.array()).any())
        throw invalid_input("spillout upper bound below lower bound");
      break;
  }
}

penalty_value penalty_eval(const penalty_spec &spec, const vec &controls) {
  const auto n = controls.size();
  spec.validate(static_cast<std::size_t>(n));
  penalty_value out{0.0, vec::Zero(n), mat::Zero(n, n)};
  switch (spec.kind) {
    case penalty_kind::norm_square:
      out.value = (spec.weights.array() * controls.array().square()).sum();
      out.gradient = 2.0 * spec.weights.cwiseProduct(controls);
      out.hessian.diagonal() = 2.0 * spec.weights;
      break;
    case penalty_kind::derivative_norm_square: {
      const mat &d = spec.transform;
      const vec dc = d * controls;
      out.value = (spec.weights.array() * dc.array().square()).sum();
      out.gradient = 2.0 * d.transpose() * spec.weights.cwiseProduct(dc);
      out.hessian = 2.0 * d.transpose() * spec.weights.asDiagonal() * d;
      break;
    }
    case penalty_kind::spillout:
      for (Eigen::Index k = 0; k < n; ++k) {
        const double c = controls[k];
        const double w = spec.weights[k];
        double excess = 0.0;
        if (c > spec.upper[k])
          excess = c - spec.upper[k];
        else if (c < spec.lower[k])
          excess = c - spec.lower[k];
        else
          continue;
        out.value += w * excess * excess;
        out.gradient[k] = 2.0 * w * excess;
        out.hessian(k, k) = 2.0 * w;
      }
      break;
  }
  return out;
}

mat diff_matrix(std::size_t n, int order, double dt) {
  if (order != 1 && order != 2) throw invalid_input("differentiation order must be 1 or 2");
  if (n < static_cast<std::size_t>(order) + 1)
    throw invalid_input("differentiation matrix needs at least order+1 points, got " +
                        std::to_string(n));
  if (!(dt > 0.0)) throw invalid_input("differentiation step must be positive");
  const auto size = static_cast<Eigen::Index>(n);
  mat d = mat::Zero(size, size);
  if (order == 1) {
    for (Eigen::Index i = 0; i + 1 < size; ++i) {
      d(i, i) = -1.0 / dt;
      d(i, i + 1) = 1.0 / dt;
    }
    return d;
  }
  const double h = 0.5 / dt;
  d(0, 0) = -3.0 * h;
  d(0, 1) = 4.0 * h;
  d(0, 2) = -h;
  for (Eigen::Index i = 1; i + 1 < size; ++i) {
    d(i, i - 1) = -h;
    d(i, i + 1) = h;
  }
  d(size - 1, size - 3) = h;
  d(size - 1, size - 2) = -4.0 * h;
  d(size - 1, size - 1) = 3.0 * h;
  return d;
}

mat channelwise_diff_matrix(std::size_t channels, std::size_t slices, int order, double dt) {
  const mat d = diff_matrix(slices, order, dt);
  const auto k = static_cast<Eigen::Index>(channels);
  mat out = mat::Zero(d.rows() * k, d.cols() * k);
  for (Eigen::Index r = 0; r < d.rows(); ++r)
    for (Eigen::Index c = 0; c < d.cols(); ++c)
      if (d(r, c) != 0.0)
        for (Eigen::Index ch = 0; ch < k; ++ch) out(r * k + ch, c * k + ch) = d(r, c);
  return out;
}

}  // namespace grape
