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

#include "grape/grape.hpp"

#include <cmath>
#include <string>

#include "grape/expm.hpp"
#include "grape/parallel.hpp"

namespace grape {

control_sequence::control_sequence(std::size_t channels, std::size_t slices)
    : channels_(channels), slices_(slices),
      values_(vec::Zero(static_cast<Eigen::Index>(channels * slices))) {}

control_sequence::control_sequence(std::size_t channels, std::size_t slices, vec flat)
    : channels_(channels), slices_(slices), values_(std::move(flat)) {
  if (values_.size() != static_cast<Eigen::Index>(channels * slices))
    throw invalid_input("control sequence length does not match K*N");
}

control_sequence control_sequence::from_matrix(const mat &channels_by_slices) {
  control_sequence seq(static_cast<std::size_t>(channels_by_slices.rows()),
                       static_cast<std::size_t>(channels_by_slices.cols()));
  seq.values_ = channels_by_slices.reshaped();
  return seq;
}

mat control_sequence::as_matrix() const {
  return values_.reshaped(static_cast<Eigen::Index>(channels_),
                          static_cast<Eigen::Index>(slices_));
}

void control_problem::validate() const {
  const auto dim = drift.rows();
  if (dim == 0 || drift.cols() != dim) throw invalid_input("drift must be a square matrix");
  for (const auto &h : controls)
    if (h.rows() != dim || h.cols() != dim)
      throw invalid_input("control operator dimension mismatch");
  if (rho0.size() != dim || target.size() != dim)
    throw invalid_input("state vector dimension mismatch");
  if (slices < 1) throw invalid_input("slice count must be at least 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw invalid_input("dt must be positive");
  if (ensemble_scalings.empty()) throw invalid_input("ensemble scalings must be nonempty");
  for (double s : ensemble_scalings)
    if (!(s > 0.0) || !std::isfinite(s)) throw invalid_input("ensemble scalings must be positive");
  for (const auto &p : penalties) p.validate(variables());
}

cx_mat slice_generator(const control_problem &problem, const control_sequence &seq,
                       std::size_t slice, double scaling) {
  cx_mat h = problem.drift;
  for (std::size_t k = 0; k < problem.channels(); ++k) {
    const double c = scaling * seq(k, slice);
    if (c != 0.0) h += c * problem.controls[k];
  }
  return h;
}

namespace {

void check(const control_problem &problem, const control_sequence &seq) {
  problem.validate();
  if (seq.channels() != problem.channels() || seq.slices() != problem.slices)
    throw invalid_input("control sequence is " + std::to_string(seq.channels()) + "x" +
                        std::to_string(seq.slices()) + ", problem expects " +
                        std::to_string(problem.channels()) + "x" +
                        std::to_string(problem.slices));
  if (!seq.flat().allFinite()) throw invalid_input("non-finite control amplitudes");
}

// Forward states rho[0..N] and costates chi[0..N-1], chi[n] = (P_{N-1}..P_{n+1})^+ target
// in 0-based slices, i.e. the bra that multiplies slice n from the left.
struct sweep {
  std::vector<cx_vec> states;
  std::vector<cx_vec> costates;
};

template <class PropagatorOf>
sweep run_sweeps(const control_problem &problem, PropagatorOf propagator) {
  const std::size_t n = problem.slices;
  sweep s;
  s.states.resize(n + 1);
  s.costates.resize(n);
  s.states[0] = problem.rho0;
  for (std::size_t i = 0; i < n; ++i) s.states[i + 1].noalias() = propagator(i) * s.states[i];
  s.costates[n - 1] = problem.target;
  for (std::size_t i = n - 1; i > 0; --i)
    s.costates[i - 1].noalias() = propagator(i).adjoint() * s.costates[i];
  return s;
}

void subtract_penalties(const control_problem &problem, const control_sequence &seq,
                        fidelity_report &report, int order) {
  for (const auto &p : problem.penalties) {
    const auto pv = penalty_eval(p, seq.flat());
    report.penalty += pv.value;
    report.value -= pv.value;
    if (order >= 1) report.gradient -= pv.gradient;
    if (order >= 2) *report.hessian -= pv.hessian;
  }
}

// Evaluates one ensemble member; accumulates weight * (J, s*grad, s^2*hess).
void accumulate_member(const control_problem &problem, const control_sequence &seq,
                       double scaling, double weight, int order, const eval_options &options,
                       fidelity_report &report) {
  const std::size_t slices = problem.slices;
  const std::size_t channels = problem.channels();

  if (order == 0) {
    std::vector<cx_mat> props(slices);
    parallel_for(slices, options.workers, [&](std::size_t n) {
      const cx_mat h = slice_generator(problem, seq, n, scaling);
      props[n] = options.cache ? cache::cached_expm(*options.cache, h, problem.dt)
                               : expm(cx{0.0, -problem.dt} * h);
    });
    cx_vec rho = problem.rho0;
    for (std::size_t n = 0; n < slices; ++n) rho = (props[n] * rho).eval();
    report.value += weight * problem.target.dot(rho).real();
    report.trajectory_evals += 1;
    return;
  }

  const auto pairs = order == 2 ? upper_triangle_pairs(channels) : std::vector<channel_pair>{};
  std::vector<slice_propagators> sp(slices);
  parallel_for(slices, options.workers, [&](std::size_t n) {
    sp[n] = slice_propagator_with_derivs(slice_generator(problem, seq, n, scaling),
                                         problem.controls, problem.dt, order, pairs,
                                         options.method);
  });

  const sweep s = run_sweeps(problem, [&](std::size_t n) -> const cx_mat & {
    return sp[n].propagator;
  });
  report.value += weight * problem.target.dot(s.states[slices]).real();
  report.trajectory_evals += 2;

  // y(n,k) = dP_{n,k} rho_n acts on the ket side, w(n,k) = dP_{n,k}^+ chi_n on the bra side.
  std::vector<cx_vec> ket(slices * channels);
  std::vector<cx_vec> bra(slices * channels);
  parallel_for(slices, options.workers, [&](std::size_t n) {
    for (std::size_t k = 0; k < channels; ++k) {
      const auto idx = control_sequence::index(k, n, channels);
      ket[idx].noalias() = sp[n].first[k] * s.states[n];
      bra[idx].noalias() = sp[n].first[k].adjoint() * s.costates[n];
    }
  });

  for (std::size_t n = 0; n < slices; ++n)
    for (std::size_t k = 0; k < channels; ++k) {
      const auto idx = control_sequence::index(k, n, channels);
      report.gradient[static_cast<Eigen::Index>(idx)] +=
          weight * scaling * s.costates[n].dot(ket[idx]).real();
    }
  if (order < 2) return;

  const std::size_t nvar = slices * channels;
  mat hess = mat::Zero(static_cast<Eigen::Index>(nvar), static_cast<Eigen::Index>(nvar));

  // Same-slice blocks from the second propagator derivatives.
  parallel_for(slices, options.workers, [&](std::size_t n) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto i = pairs[p].first;
      const auto j = pairs[p].second;
      const double v = s.costates[n].dot(sp[n].second[p] * s.states[n]).real();
      const auto a = static_cast<Eigen::Index>(control_sequence::index(i, n, channels));
      const auto b = static_cast<Eigen::Index>(control_sequence::index(j, n, channels));
      hess(a, b) = v;
      hess(b, a) = v;
    }
  });

  // Cross-slice blocks (n > m): carry dP_m rho_m forward through the
  // intermediate propagators and contract with the recycled bra vectors.
  parallel_for(nvar, options.workers, [&](std::size_t col) {
    const std::size_t m = col / channels;
    cx_vec v = ket[col];
    cx_vec tmp(v.size());
    for (std::size_t n = m + 1; n < slices; ++n) {
      for (std::size_t j = 0; j < channels; ++j) {
        const auto row = control_sequence::index(j, n, channels);
        hess(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
            bra[row].dot(v).real();
      }
      if (n + 1 < slices) {
        tmp.noalias() = sp[n].propagator * v;
        v.swap(tmp);
      }
    }
  });

  if (options.independent_lower_half) {
    // Mirror route: carry dP_n^+ chi_n backward and contract with the kets.
    parallel_for(nvar, options.workers, [&](std::size_t row) {
      const std::size_t n = row / channels;
      cx_vec u = bra[row];
      cx_vec tmp(u.size());
      for (std::size_t m = n; m-- > 0;) {
        for (std::size_t k = 0; k < channels; ++k) {
          const auto col = control_sequence::index(k, m, channels);
          hess(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(row)) =
              u.dot(ket[col]).real();
        }
        if (m > 0) {
          tmp.noalias() = sp[m].propagator.adjoint() * u;
          u.swap(tmp);
        }
      }
    });
  } else {
    hess.triangularView<Eigen::StrictlyUpper>() = hess.transpose();
  }

  *report.hessian += (weight * scaling * scaling) * hess;
}

fidelity_report evaluate(const control_problem &problem, const control_sequence &seq,
                         int order, const eval_options &options) {
  check(problem, seq);
  const auto nvar = static_cast<Eigen::Index>(problem.variables());
  fidelity_report report;
  if (order >= 1) report.gradient = vec::Zero(nvar);
  if (order >= 2) report.hessian = mat::Zero(nvar, nvar);

  const double weight = 1.0 / static_cast<double>(problem.ensemble_scalings.size());
  for (double scaling : problem.ensemble_scalings)
    accumulate_member(problem, seq, scaling, weight, order, options, report);

  if (order >= 2) {
    mat &h = *report.hessian;
    const double norm = h.norm();
    report.asymmetry = norm > 0.0 ? (h - h.transpose()).norm() / norm : 0.0;
    h = (0.5 * (h + h.transpose())).eval();
  }
  subtract_penalties(problem, seq, report, order);
  return report;
}

}  // namespace

fidelity_report fidelity(const control_problem &problem, const control_sequence &seq,
                         const eval_options &options) {
  return evaluate(problem, seq, 0, options);
}

fidelity_report fidelity_gradient(const control_problem &problem, const control_sequence &seq,
                                  const eval_options &options) {
  return evaluate(problem, seq, 1, options);
}

fidelity_report fidelity_hessian(const control_problem &problem, const control_sequence &seq,
                                 const eval_options &options) {
  return evaluate(problem, seq, 2, options);
}

}  // namespace grape
