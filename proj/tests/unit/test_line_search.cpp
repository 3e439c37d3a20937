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

#include <cmath>

#include "grape/optim/line_search.hpp"

using namespace grape;
using namespace grape::optim;

namespace {

objective_fn scalar(double (*f)(double), double (*df)(double)) {
  return [f, df](const vec &x, int) {
    evaluation e;
    e.value = f(x[0]);
    e.gradient = vec::Constant(1, df(x[0]));
    e.cost = 1;
    return e;
  };
}

bool wolfe(const line_search_result &r, double f0, double slope0, const line_search_settings &s) {
  return r.point->value <= f0 + s.c1 * r.step * slope0 &&
         std::abs(r.slope) <= s.c2 * std::abs(slope0);
}

}  // namespace

TEST_CASE("quadratic with the Newton direction takes the unit step") {
  const objective_fn f = [](const vec &x, int) {
    evaluation e;
    e.value = 0.5 * x.squaredNorm() * 3.0;
    e.gradient = 3.0 * x;
    e.cost = 1;
    return e;
  };
  const vec x = (vec(2) << 1.0, -2.0).finished();
  const vec g = 3.0 * x;
  const vec d = -g / 3.0;
  const auto r = line_search(f, x, d, 7.5, g.dot(d), 1, 1.0, {});
  CHECK(r.status == line_search_status::wolfe);
  CHECK(r.step == 1.0);
  CHECK(r.evals == 1);
  CHECK(r.cost == 1);
}

TEST_CASE("quartic satisfies both Wolfe inequalities") {
  const auto f = scalar([](double x) { return x * x * x * x; }, [](double x) { return 4 * x * x * x; });
  line_search_settings s;
  const vec x = vec::Ones(1), d = -vec::Ones(1);
  // A scan over the step grid confirms an admissible interval exists.
  int admissible = 0;
  for (double a = 0.01; a < 2.0; a += 0.01) {
    const double y = 1.0 - a;
    if (std::pow(y, 4) <= 1.0 + s.c1 * a * -4.0 && std::abs(-4 * y * y * y) <= s.c2 * 4.0)
      ++admissible;
  }
  REQUIRE(admissible > 0);
  for (double a0 : {1.0, 0.01, 5.0, 100.0}) {
    const auto r = line_search(f, x, d, 1.0, -4.0, 1, a0, s);
    CHECK(r.status == line_search_status::wolfe);
    CHECK(wolfe(r, 1.0, -4.0, s));
  }
  s.c2 = 0.1;
  const auto tight = line_search(f, x, d, 1.0, -4.0, 1, 1.0, s);
  CHECK(tight.status == line_search_status::wolfe);
  CHECK(wolfe(tight, 1.0, -4.0, s));
}

TEST_CASE("bracketing extends short steps") {
  const auto f = scalar([](double x) { return (x - 50.0) * (x - 50.0); },
                        [](double x) { return 2.0 * (x - 50.0); });
  line_search_settings s;
  const auto r = line_search(f, vec::Zero(1), vec::Ones(1), 2500.0, -100.0, 1, 1.0, s);
  CHECK(r.status == line_search_status::wolfe);
  CHECK(r.step > 1.0);
  CHECK(wolfe(r, 2500.0, -100.0, s));
}

TEST_CASE("non-descent direction is rejected") {
  const auto f = scalar([](double x) { return x * x; }, [](double x) { return 2 * x; });
  CHECK_THROWS_AS(line_search(f, vec::Ones(1), vec::Ones(1), 1.0, 2.0, 1, 1.0, {}), invalid_input);
  CHECK_THROWS_AS(line_search(f, vec::Ones(1), vec::Ones(1), 1.0, 0.0, 1, 1.0, {}), invalid_input);
}

TEST_CASE("evaluation limits return the best decreasing point") {
  // Unbounded below: bracketing never finds an upper end.
  const auto f = scalar([](double x) { return -x; }, [](double) { return -1.0; });
  line_search_settings s;
  s.max_evals = 3;
  const auto r = line_search(f, vec::Zero(1), vec::Ones(1), 0.0, -1.0, 1, 1.0, s);
  CHECK(r.status == line_search_status::max_evals);
  CHECK(r.evals == 3);
  REQUIRE(r.point);
  CHECK(r.point->value == -r.step);
  CHECK(r.step > 1.0);

  int calls = 0;
  const auto budget = line_search(f, vec::Zero(1), vec::Ones(1), 0.0, -1.0, 1, 1.0, {},
                                  [&] { return calls++ < 0; });
  CHECK(budget.status == line_search_status::budget);
  CHECK(budget.evals == 0);
  CHECK(budget.step == 0.0);
}

TEST_CASE("cubic interpolation") {
  // f = (x-1)^2 sampled at 0 and 3.
  const auto m = cubic_minimizer(0.0, 1.0, -2.0, 3.0, 4.0, 4.0);
  REQUIRE(m);
  CHECK(*m == doctest::Approx(1.0));
  // f = x^3 - 3x has its local minimum at 1.
  const auto c = cubic_minimizer(-0.5, 1.375, -2.25, 2.0, 2.0, 9.0);
  REQUIRE(c);
  CHECK(*c == doctest::Approx(1.0));
  // Straight line: no minimiser.
  CHECK_FALSE(cubic_minimizer(0.0, 0.0, 1.0, 1.0, 1.0, 1.0));
}

TEST_CASE("line search settings validation") {
  line_search_settings s;
  s.c1 = 0.5;
  s.c2 = 0.4;
  CHECK_THROWS_AS(s.validate(), invalid_input);
  s = {};
  s.max_evals = 0;
  CHECK_THROWS_AS(s.validate(), invalid_input);
}
