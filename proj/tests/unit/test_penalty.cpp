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

#include <doctest.h>

#include <random>

#include "grape/penalty.hpp"
#include "helpers.hpp"

using namespace grape;

namespace {

// Components exactly on a spillout bound are differenced from the inside.
void check_derivatives(const penalty_spec &spec, const vec &c) {
  const auto value = [&](const vec &x) { return penalty_eval(spec, x).value; };
  const auto gradient = [&](const vec &x) { return penalty_eval(spec, x).gradient; };
  const auto p = penalty_eval(spec, c);
  const Eigen::VectorXi side = spec.kind == penalty_kind::spillout
                                   ? testing::inward_sides(c, spec.upper, spec.lower)
                                   : Eigen::VectorXi::Zero(c.size());
  const vec g = testing::fd_gradient_sided(value, c, 1e-6, side);
  CHECK((p.gradient - g).lpNorm<Eigen::Infinity>() <
        1e-8 * std::max(1.0, p.gradient.lpNorm<Eigen::Infinity>()));
  const mat h = testing::fd_jacobian_sided(gradient, c, 1e-6, side);
  CHECK((p.hessian - h).lpNorm<Eigen::Infinity>() <
        1e-8 * std::max(1.0, p.hessian.lpNorm<Eigen::Infinity>()));
}

}  // namespace

TEST_CASE("norm square") {
  penalty_spec spec{penalty_kind::norm_square, vec::Ones(2)};
  const auto p = penalty_eval(spec, (vec(2) << 1.0, 2.0).finished());
  CHECK(p.value == 5.0);
  CHECK(p.gradient == (vec(2) << 2.0, 4.0).finished());
  CHECK(p.hessian == 2.0 * mat::Identity(2, 2));

  std::mt19937_64 rng(41);
  spec.weights = testing::random_vec(7, rng).cwiseAbs();
  check_derivatives(spec, testing::random_vec(7, rng));
}

TEST_CASE("spillout") {
  penalty_spec spec{penalty_kind::spillout, vec::Ones(1), vec::Constant(1, 2.0), vec::Constant(1, -2.0)};
  auto p = penalty_eval(spec, vec::Constant(1, 3.0));
  CHECK(p.value == 1.0);
  CHECK(p.gradient[0] == 2.0);
  CHECK(p.hessian(0, 0) == 2.0);
  p = penalty_eval(spec, vec::Constant(1, 1.0));
  CHECK(p.value == 0.0);
  CHECK(p.gradient[0] == 0.0);
  CHECK(p.hessian(0, 0) == 0.0);
  p = penalty_eval(spec, vec::Constant(1, -2.5));
  CHECK(p.value == doctest::Approx(0.25));
  CHECK(p.gradient[0] == doctest::Approx(-1.0));

  // On a bound the gates are closed.
  for (double c : {2.0, -2.0}) {
    p = penalty_eval(spec, vec::Constant(1, c));
    CHECK(p.value == 0.0);
    CHECK(p.gradient[0] == 0.0);
    CHECK(p.hessian(0, 0) == 0.0);
  }

  std::mt19937_64 rng(42);
  const Eigen::Index n = 9;
  spec.weights = testing::random_vec(n, rng).cwiseAbs();
  spec.upper = vec::Constant(n, 0.5);
  spec.lower = vec::Constant(n, -0.5);
  vec c = testing::random_vec(n, rng);
  c[0] = 0.5;
  c[1] = -0.5;
  check_derivatives(spec, c);
}

TEST_CASE("spillout at the bounds") {
  // The value is C1 at c = u: the inward difference is exact, while a
  // central difference carries a truncation error of w h / 2.
  penalty_spec spec{penalty_kind::spillout, vec::Constant(2, 3.0), vec::Constant(2, 1.0),
                    vec::Constant(2, -1.0)};
  const vec c = (vec(2) << 1.0, -1.0).finished();
  const auto value = [&](const vec &x) { return penalty_eval(spec, x).value; };
  const auto p = penalty_eval(spec, c);
  CHECK(p.gradient.norm() == 0.0);
  CHECK(p.hessian.norm() == 0.0);
  const double h = 1e-6;
  const auto inward = testing::inward_sides(c, spec.upper, spec.lower);
  CHECK(inward == (Eigen::VectorXi(2) << -1, 1).finished());
  CHECK(testing::fd_gradient_sided(value, c, h, inward).norm() == 0.0);
  CHECK(testing::fd_gradient(value, c, h).cwiseAbs().maxCoeff() == doctest::Approx(3.0 * h / 2.0));
  // Outward curvature is the outside branch 2w.
  vec out = c;
  out[0] += h;
  CHECK(2.0 * value(out) / (h * h) == doctest::Approx(6.0).epsilon(1e-8));
  out = c;
  out[1] -= h;
  CHECK(2.0 * value(out) / (h * h) == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("derivative norm square") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 5; ++t) {
    penalty_spec spec;
    spec.kind = penalty_kind::derivative_norm_square;
    spec.transform = mat::Random(6, 8);
    spec.weights = testing::random_vec(6, rng).cwiseAbs();
    check_derivatives(spec, testing::random_vec(8, rng));
  }
  penalty_spec spec;
  spec.kind = penalty_kind::derivative_norm_square;
  spec.transform = diff_matrix(4, 1);
  spec.weights = vec::Ones(4);
  const auto p = penalty_eval(spec, (vec(4) << 0, 1, 3, 6).finished());
  CHECK(p.value == doctest::Approx(1 + 4 + 9));
}

TEST_CASE("differentiation matrices") {
  const mat d1 = diff_matrix(4, 1);
  CHECK((d1 * vec::Constant(4, 7.0)).norm() == 0.0);
  CHECK(d1 * (vec(4) << 0, 1, 2, 3).finished() == (vec(4) << 1, 1, 1, 0).finished());
  CHECK(d1.rowwise().sum().norm() == 0.0);
  CHECK(diff_matrix(4, 1, 0.5) == 2.0 * d1);

  const mat d2 = diff_matrix(5, 2);
  CHECK(d2.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  const vec q = (vec(5) << 0, 1, 4, 9, 16).finished();
  // Exact derivative 2x of x^2 at 0..4 for second-order stencils.
  CHECK((d2 * q - (vec(5) << 0, 2, 4, 6, 8).finished()).norm() < 1e-13);

  CHECK_THROWS_AS(diff_matrix(1, 1), invalid_input);
  CHECK_THROWS_AS(diff_matrix(2, 2), invalid_input);
  CHECK_THROWS_AS(diff_matrix(5, 3), invalid_input);

  const mat c = channelwise_diff_matrix(2, 4, 1, 1.0);
  vec seq(8);
  for (int n = 0; n < 4; ++n) {
    seq[2 * n] = n;
    seq[2 * n + 1] = 5.0;
  }
  const vec d = c * seq;
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 0.0);
  CHECK(d[6] == 0.0);
}

TEST_CASE("penalty validation") {
  penalty_spec spec{penalty_kind::norm_square, vec::Ones(3)};
  CHECK_THROWS_AS(spec.validate(4), invalid_input);
  spec.weights[1] = -1.0;
  CHECK_THROWS_AS(spec.validate(3), invalid_input);
  penalty_spec s{penalty_kind::spillout, vec::Ones(1), vec::Constant(1, -1.0), vec::Constant(1, 1.0)};
  CHECK_THROWS_AS(s.validate(1), invalid_input);
  CHECK_THROWS_AS(penalty_eval(s, vec::Ones(1)), invalid_input);
}
