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

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "grape/grape.hpp"
#include "grape/spin_model.hpp"

namespace grape::testing {

inline cx_mat random_cx(Eigen::Index n, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  cx_mat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = cx{d(rng), d(rng)};
  return m;
}

inline cx_mat random_hermitian(Eigen::Index n, std::mt19937_64 &rng, double scale = 1.0) {
  const cx_mat a = random_cx(n, rng, scale);
  return 0.5 * (a + a.adjoint());
}

inline mat random_symmetric(Eigen::Index n, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  mat a(n, n);
  for (auto &v : a.reshaped()) v = d(rng);
  return 0.5 * (a + a.transpose());
}

inline vec random_vec(Eigen::Index n, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  vec v(n);
  for (auto &x : v) x = d(rng);
  return v;
}

inline double rel_err(const auto &a, const auto &b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

// Central difference of a scalar function along coordinate i.
inline double central_diff(const std::function<double(const vec &)> &f, const vec &x,
                           Eigen::Index i, double h) {
  vec xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

inline vec fd_gradient(const std::function<double(const vec &)> &f, const vec &x, double h) {
  vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = central_diff(f, x, i, h);
  return g;
}

// Central differences, except one-sided where side[i] is -1 (backward) or +1
// (forward); used at kinks where only one side is smooth.
inline vec fd_gradient_sided(const std::function<double(const vec &)> &f, const vec &x, double h,
                             const Eigen::VectorXi &side) {
  vec g(x.size());
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (side[i] == 0) {
      g[i] = central_diff(f, x, i, h);
      continue;
    }
    vec xs = x;
    xs[i] += side[i] * h;
    g[i] = (f(xs) - f0) / (side[i] * h);
  }
  return g;
}

inline mat fd_jacobian_sided(const std::function<vec(const vec &)> &f, const vec &x, double h,
                             const Eigen::VectorXi &side) {
  const vec f0 = f(x);
  mat j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    vec xp = x, xm = x;
    if (side[i] >= 0) xp[i] += h;
    if (side[i] <= 0) xm[i] -= h;
    j.col(i) = (f(xp) - f(xm)) / ((side[i] == 0 ? 2.0 : 1.0) * h);
  }
  return j;
}

// Inward side for components sitting exactly on a spillout bound.
inline Eigen::VectorXi inward_sides(const vec &x, const vec &upper, const vec &lower) {
  Eigen::VectorXi side = Eigen::VectorXi::Zero(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == upper[i]) side[i] = -1;
    else if (x[i] == lower[i]) side[i] = 1;
  }
  return side;
}

inline mat fd_jacobian(const std::function<vec(const vec &)> &f, const vec &x, double h) {
  mat j(f(x).size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

// Two coupled spin-1/2 with random offsets and coupling, x controls on each
// spin, random normalised start and target states. Frequencies are in units
// where dt * |H| is of order one.
inline control_problem random_two_spin_problem(std::mt19937_64 &rng, std::size_t slices,
                                               double dt = 0.2) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  spin::spin_system sys;
  sys.isotopes = {"1H", "1H"};
  sys.magnet_field = 1.0;
  sys.offsets_hz = {0.3 * u(rng), 0.3 * u(rng)};
  sys.set_coupling(0, 1, 0.2 * u(rng));
  const std::vector<spin::control_channel> channels{{"x0", {0}, spin::axis::x},
                                                    {"y1", {1}, spin::axis::y}};
  control_problem p;
  p.drift = spin::drift_generator(sys);
  p.controls = spin::build_controls(sys, channels);
  const auto dim = p.drift.rows();
  cx_vec a = cx_vec::Zero(dim), b = cx_vec::Zero(dim);
  for (Eigen::Index i = 1; i < dim; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
  }
  p.rho0 = a.normalized();
  p.target = b.normalized();
  p.dt = dt;
  p.slices = slices;
  return p;
}

inline control_sequence random_sequence(const control_problem &p, std::mt19937_64 &rng,
                                        double scale = 1.0) {
  return control_sequence(p.channels(), p.slices,
                          random_vec(static_cast<Eigen::Index>(p.variables()), rng, scale));
}

}  // namespace grape::testing
