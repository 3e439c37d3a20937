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

#include "grape/propagator_derivs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grape/expm.hpp"

namespace grape {

namespace {

// Block-triangular Pade data shared by every channel and pair of one slice.
// Naming follows the block position: d* diagonal, f* channel superdiagonal
// (block 12 of [[A, E], [0, A]]), s* the symmetrised corner A_ij + A_ji.
struct channel_terms {
  cx_mat f2, f4, f6;   // superdiagonals of M^2, M^4, M^6
  cx_mat w1, w2;       // superdiagonals of the U-polynomial intermediates
  cx_mat v1;           // superdiagonal of the V-polynomial intermediate
  cx_mat q;            // superdiagonal of the Pade denominator
  cx_mat r;            // superdiagonal of the current (squared) approximant
};

void check_inputs(const cx_mat &generator, std::span<const cx_mat> controls, double dt,
                  int order) {
  if (order != 1 && order != 2)
    throw invalid_input("derivative order must be 1 or 2");
  if (generator.rows() != generator.cols())
    throw invalid_input("generator must be square");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw invalid_input("dt must be positive");
  for (const auto &c : controls)
    if (c.rows() != generator.rows() || c.cols() != generator.cols())
      throw invalid_input("control operator dimension mismatch");
}

void check_pairs(std::span<const channel_pair> pairs, std::size_t channels) {
  for (const auto &p : pairs)
    if (p.first >= channels || p.second >= channels)
      throw invalid_input("channel pair references unknown channel");
}

slice_propagators structured(const cx_mat &generator, std::span<const cx_mat> controls,
                             double dt, int order, std::span<const channel_pair> pairs) {
  const double *b = pade13_coefficients;
  const auto n = generator.rows();
  const std::size_t channels = controls.size();
  const cx scale_to_generator{0.0, -dt};

  cx_mat a = scale_to_generator * generator;
  std::vector<cx_mat> e(channels);
  for (std::size_t k = 0; k < channels; ++k) e[k] = scale_to_generator * controls[k];

  // Column sums of the augmented matrices: block column 1 holds A, later
  // block columns hold E_k stacked on A.
  const Eigen::RowVectorXd col_a = a.cwiseAbs().colwise().sum();
  double norm = col_a.maxCoeff();
  for (const auto &ek : e)
    norm = std::max(norm, (col_a + ek.cwiseAbs().colwise().sum()).maxCoeff());
  const int squarings = expm_squarings(norm);
  const double scale = std::ldexp(1.0, -squarings);
  a *= scale;
  for (auto &ek : e) ek *= scale;

  const cx_mat ident = cx_mat::Identity(n, n);
  cx_mat a2, a4, a6;
  a2.noalias() = a * a;
  a4.noalias() = a2 * a2;
  a6.noalias() = a4 * a2;

  const cx_mat w1d = b[13] * a6 + b[11] * a4 + b[9] * a2;
  cx_mat w2d = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident;
  w2d.noalias() += a6 * w1d;
  cx_mat ud;
  ud.noalias() = a * w2d;
  const cx_mat v1d = b[12] * a6 + b[10] * a4 + b[8] * a2;
  cx_mat vd = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  vd.noalias() += a6 * v1d;

  const cx_mat qd = vd - ud;
  const Eigen::PartialPivLU<cx_mat> lu(qd);
  cx_mat rd = lu.solve(vd + ud);

  std::vector<channel_terms> ch(channels);
  for (std::size_t k = 0; k < channels; ++k) {
    auto &t = ch[k];
    const cx_mat &ek = e[k];
    t.f2.noalias() = a * ek;
    t.f2.noalias() += ek * a;
    t.f4.noalias() = a2 * t.f2;
    t.f4.noalias() += t.f2 * a2;
    t.f6.noalias() = a4 * t.f2;
    t.f6.noalias() += t.f4 * a2;

    t.w1 = b[13] * t.f6 + b[11] * t.f4 + b[9] * t.f2;
    t.w2 = b[7] * t.f6 + b[5] * t.f4 + b[3] * t.f2;
    t.w2.noalias() += a6 * t.w1;
    t.w2.noalias() += t.f6 * w1d;
    cx_mat u;
    u.noalias() = a * t.w2;
    u.noalias() += ek * w2d;

    t.v1 = b[12] * t.f6 + b[10] * t.f4 + b[8] * t.f2;
    cx_mat v = b[6] * t.f6 + b[4] * t.f4 + b[2] * t.f2;
    v.noalias() += a6 * t.v1;
    v.noalias() += t.f6 * v1d;

    t.q = v - u;
    cx_mat rhs = v + u;
    rhs.noalias() -= t.q * rd;
    t.r = lu.solve(rhs);
  }

  std::vector<cx_mat> corner(order == 2 ? pairs.size() : 0);
  for (std::size_t p = 0; p < corner.size(); ++p) {
    const auto i = pairs[p].first;
    const auto j = pairs[p].second;
    const auto &ti = ch[i];
    const auto &tj = ch[j];

    cx_mat s2;
    s2.noalias() = e[i] * e[j];
    s2.noalias() += e[j] * e[i];
    cx_mat s4;
    s4.noalias() = a2 * s2;
    s4.noalias() += s2 * a2;
    s4.noalias() += ti.f2 * tj.f2;
    s4.noalias() += tj.f2 * ti.f2;
    cx_mat s6;
    s6.noalias() = a4 * s2;
    s6.noalias() += s4 * a2;
    s6.noalias() += ti.f4 * tj.f2;
    s6.noalias() += tj.f4 * ti.f2;

    const cx_mat w1s = b[13] * s6 + b[11] * s4 + b[9] * s2;
    cx_mat w2s = b[7] * s6 + b[5] * s4 + b[3] * s2;
    w2s.noalias() += a6 * w1s;
    w2s.noalias() += s6 * w1d;
    w2s.noalias() += ti.f6 * tj.w1;
    w2s.noalias() += tj.f6 * ti.w1;
    cx_mat us;
    us.noalias() = a * w2s;
    us.noalias() += e[i] * tj.w2;
    us.noalias() += e[j] * ti.w2;

    const cx_mat v1s = b[12] * s6 + b[10] * s4 + b[8] * s2;
    cx_mat vs = b[6] * s6 + b[4] * s4 + b[2] * s2;
    vs.noalias() += a6 * v1s;
    vs.noalias() += s6 * v1d;
    vs.noalias() += ti.f6 * tj.v1;
    vs.noalias() += tj.f6 * ti.v1;

    cx_mat rhs = vs + us;
    rhs.noalias() -= ti.q * tj.r;
    rhs.noalias() -= tj.q * ti.r;
    rhs.noalias() -= (vs - us) * rd;
    corner[p] = lu.solve(rhs);
  }

  // Squaring phase: every block of R^2 is formed from blocks of R, so the
  // corners and superdiagonals are updated before the diagonal.
  cx_mat tmp(n, n);
  for (int step = 0; step < squarings; ++step) {
    for (std::size_t p = 0; p < corner.size(); ++p) {
      const auto &ri = ch[pairs[p].first].r;
      const auto &rj = ch[pairs[p].second].r;
      tmp.noalias() = rd * corner[p];
      tmp.noalias() += corner[p] * rd;
      tmp.noalias() += ri * rj;
      tmp.noalias() += rj * ri;
      corner[p].swap(tmp);
    }
    for (auto &t : ch) {
      tmp.noalias() = rd * t.r;
      tmp.noalias() += t.r * rd;
      t.r.swap(tmp);
    }
    tmp.noalias() = rd * rd;
    rd.swap(tmp);
  }

  slice_propagators out;
  out.propagator = std::move(rd);
  out.first.reserve(channels);
  for (auto &t : ch) out.first.push_back(std::move(t.r));
  if (order == 2) {
    out.pairs.assign(pairs.begin(), pairs.end());
    out.second = std::move(corner);
  }
  out.dt = dt;
  return out;
}

slice_propagators dense(const cx_mat &generator, std::span<const cx_mat> controls, double dt,
                        int order, std::span<const channel_pair> pairs) {
  const auto n = generator.rows();
  const std::size_t channels = controls.size();
  slice_propagators out;
  out.dt = dt;
  out.first.assign(channels, cx_mat());
  std::vector<bool> have_first(channels, false);

  if (order == 2) {
    out.pairs.assign(pairs.begin(), pairs.end());
    for (const auto &p : pairs) {
      const cx_mat x = second_order_block_expm(generator, controls[p.first], controls[p.second], dt);
      cx_mat sum = x.block(0, 2 * n, n, n);
      if (p.first != p.second) {
        const cx_mat y =
            second_order_block_expm(generator, controls[p.second], controls[p.first], dt);
        sum += y.block(0, 2 * n, n, n);
      } else {
        sum *= 2.0;
      }
      out.second.push_back(std::move(sum));
      if (!have_first[p.first]) {
        out.first[p.first] = x.block(0, n, n, n);
        have_first[p.first] = true;
      }
      if (!have_first[p.second]) {
        out.first[p.second] = x.block(n, 2 * n, n, n);
        have_first[p.second] = true;
      }
      if (out.propagator.size() == 0) out.propagator = x.block(0, 0, n, n);
    }
  }
  for (std::size_t k = 0; k < channels; ++k) {
    if (have_first[k]) continue;
    const cx_mat x = first_order_block_expm(generator, controls[k], dt);
    out.first[k] = x.block(0, n, n, n);
    if (out.propagator.size() == 0) out.propagator = x.block(0, 0, n, n);
  }
  if (out.propagator.size() == 0) out.propagator = expm(cx{0.0, -dt} * generator);
  return out;
}

}  // namespace

std::vector<channel_pair> upper_triangle_pairs(std::size_t channels) {
  std::vector<channel_pair> out;
  out.reserve(channels * (channels + 1) / 2);
  for (std::size_t i = 0; i < channels; ++i)
    for (std::size_t j = i; j < channels; ++j) out.push_back({i, j});
  return out;
}

const cx_mat &slice_propagators::second_derivative(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto &q = pairs[p];
    if ((q.first == i && q.second == j) || (q.first == j && q.second == i)) return second[p];
  }
  throw invalid_input("second derivative for pair (" + std::to_string(i) + "," +
                      std::to_string(j) + ") was not computed");
}

slice_propagators slice_propagator_with_derivs(const cx_mat &generator,
                                               std::span<const cx_mat> controls, double dt,
                                               int order,
                                               std::span<const channel_pair> pairs,
                                               aux_method method) {
  check_inputs(generator, controls, dt, order);
  if (order == 2) check_pairs(pairs, controls.size());
  if (!generator.allFinite()) throw invalid_input("generator has non-finite entries");
  return method == aux_method::dense ? dense(generator, controls, dt, order, pairs)
                                     : structured(generator, controls, dt, order, pairs);
}

cx_mat first_order_block_expm(const cx_mat &generator, const cx_mat &control, double dt) {
  const auto n = generator.rows();
  cx_mat block = cx_mat::Zero(2 * n, 2 * n);
  block.block(0, 0, n, n) = generator;
  block.block(n, n, n, n) = generator;
  block.block(0, n, n, n) = control;
  return expm(cx{0.0, -dt} * block);
}

cx_mat second_order_block_expm(const cx_mat &generator, const cx_mat &control_i,
                               const cx_mat &control_j, double dt) {
  const auto n = generator.rows();
  cx_mat block = cx_mat::Zero(3 * n, 3 * n);
  for (int k = 0; k < 3; ++k) block.block(k * n, k * n, n, n) = generator;
  block.block(0, n, n, n) = control_i;
  block.block(n, 2 * n, n, n) = control_j;
  return expm(cx{0.0, -dt} * block);
}

}  // namespace grape
