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

#include "grape/optim/regularize.hpp"

#include <cmath>

namespace grape::optim {

namespace {

void check_symmetric(const mat &h) {
  if (h.rows() != h.cols()) throw invalid_input("Hessian must be square");
  if (!h.allFinite()) throw numerical_error("Hessian has non-finite entries");
  const double norm = h.norm();
  if ((h - h.transpose()).norm() > 1e-8 * norm)
    throw invalid_input("Hessian is not symmetric");
}

double condition_from(const vec &eigenvalues, double shift) {
  const double lo = eigenvalues.minCoeff() + shift;
  const double hi = eigenvalues.maxCoeff() + shift;
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// Most negative eigenvalue shift for the augmented Hessian at scaling alpha.
double augmented_shift(const mat &h, const vec &g, double alpha) {
  const Eigen::SelfAdjointEigenSolver<mat> es(augmented_hessian(h, g, alpha),
                                              Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("augmented eigendecomposition failed");
  return std::max(0.0, -es.eigenvalues().minCoeff());
}

}  // namespace

double regularizer_settings::condition_cap() const {
  return std::pow(machine_eps, -1.0 / cond_power);
}

void regularizer_settings::validate() const {
  if (!(phi > 0.0 && phi < 1.0)) throw invalid_input("phi must lie in (0, 1)");
  if (!(alpha_max >= 1.0)) throw invalid_input("alpha_max must be at least 1");
  if (!(delta > 0.0)) throw invalid_input("delta must be positive");
  if (cond_power < 1) throw invalid_input("cond_power must be positive");
  if (!(machine_eps > 0.0 && machine_eps < 1.0)) throw invalid_input("machine_eps out of range");
}

std::optional<mat> try_cholesky(const mat &h) {
  check_symmetric(h);
  const Eigen::LLT<mat> llt(h);
  if (llt.info() != Eigen::Success) return std::nullopt;
  mat l = llt.matrixL();
  if (!l.allFinite() || (l.diagonal().array() <= 0.0).any()) return std::nullopt;
  return l;
}

double trm_trial_shift(const mat &h) {
  const double frob = h.norm();
  const double min_diag = h.diagonal().minCoeff();
  return min_diag < 0.0 ? frob - min_diag : frob;
}

trm_result trm_regularize(const mat &h, const regularizer_settings &settings) {
  check_symmetric(h);
  const auto n = h.rows();
  const mat ident = mat::Identity(n, n);
  trm_result out;
  if (settings.trm == trm_variant::eigen_shift) {
    const Eigen::SelfAdjointEigenSolver<mat> es(h);
    if (es.info() != Eigen::Success) throw numerical_error("Hessian eigendecomposition failed");
    out.sigma = std::max(0.0, settings.delta - es.eigenvalues().minCoeff());
    const vec shifted = es.eigenvalues().array() + out.sigma;
    out.hessian = es.eigenvectors() * shifted.asDiagonal() * es.eigenvectors().transpose();
    out.hessian = (0.5 * (out.hessian + out.hessian.transpose())).eval();
    out.attempts = 1;
    return out;
  }
  double sigma = trm_trial_shift(h);
  if (!(sigma > 0.0)) sigma = settings.delta;
  for (std::size_t attempt = 1; attempt <= 2000; ++attempt) {
    mat shifted = h + sigma * ident;
    if (try_cholesky(shifted)) {
      out.hessian = std::move(shifted);
      out.sigma = sigma;
      out.attempts = attempt;
      return out;
    }
    sigma *= 2.0;
  }
  throw numerical_error("eigenvalue shifting did not produce a positive definite matrix");
}

mat augmented_hessian(const mat &h, const vec &g, double alpha) {
  const auto n = h.rows();
  mat aug = mat::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = alpha * alpha * h;
  aug.topRightCorner(n, 1) = alpha * g;
  aug.bottomLeftCorner(1, n) = alpha * g.transpose();
  return aug;
}

double condition_number(const mat &h) {
  const Eigen::SelfAdjointEigenSolver<mat> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition failed");
  return condition_from(es.eigenvalues(), 0.0);
}

rfo_result rfo_step(const mat &h, const vec &g, const regularizer_settings &settings) {
  settings.validate();
  check_symmetric(h);
  if (g.size() != h.rows()) throw invalid_input("gradient length does not match Hessian");
  if (!g.allFinite()) throw numerical_error("gradient has non-finite entries");

  const Eigen::SelfAdjointEigenSolver<mat> hes(h, Eigen::EigenvaluesOnly);
  if (hes.info() != Eigen::Success) throw numerical_error("Hessian eigendecomposition failed");
  const vec &lambda = hes.eigenvalues();
  const double lambda_min = std::abs(lambda.minCoeff());

  rfo_result out;
  const double alpha_raw =
      lambda_min > 0.0 ? 1.0 / std::sqrt(lambda_min) : std::numeric_limits<double>::infinity();
  out.alpha_clamped = alpha_raw > settings.alpha_max;
  out.alpha0 = std::min(alpha_raw, settings.alpha_max);

  // The top-left block of the regularised augmented Hessian is
  // h + (sigma / alpha^2) 1, so its spectrum follows from lambda directly.
  const double cap = settings.condition_cap();
  double alpha = out.alpha0;
  double sigma = augmented_shift(h, g, alpha);
  double cond = condition_from(lambda, sigma / (alpha * alpha));
  while (cond > cap && out.damping_steps < settings.max_alpha_steps) {
    alpha *= settings.phi;
    sigma = augmented_shift(h, g, alpha);
    cond = condition_from(lambda, sigma / (alpha * alpha));
    ++out.damping_steps;
  }
  if (settings.allow_alpha_growth && out.damping_steps == 0) {
    while (alpha / settings.phi <= settings.alpha_max) {
      const double trial = alpha / settings.phi;
      const double trial_sigma = augmented_shift(h, g, trial);
      const double trial_cond = condition_from(lambda, trial_sigma / (trial * trial));
      if (trial_cond > cap) break;
      alpha = trial;
      sigma = trial_sigma;
      cond = trial_cond;
    }
  }

  rfo_result fixed = rfo_step_at(h, g, alpha, settings.machine_eps);
  fixed.alpha0 = out.alpha0;
  fixed.alpha_clamped = out.alpha_clamped;
  fixed.damping_steps = out.damping_steps;
  fixed.condition = condition_from(lambda, fixed.sigma / (alpha * alpha));
  return fixed;
}

rfo_result rfo_step_at(const mat &h, const vec &g, double alpha, double machine_eps) {
  check_symmetric(h);
  if (g.size() != h.rows()) throw invalid_input("gradient length does not match Hessian");
  if (!g.allFinite()) throw numerical_error("gradient has non-finite entries");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw invalid_input("alpha must be positive");
  const auto n = h.rows();
  rfo_result out;
  out.alpha0 = alpha;
  const Eigen::SelfAdjointEigenSolver<mat> aes(augmented_hessian(h, g, alpha));
  if (aes.info() != Eigen::Success) throw numerical_error("augmented eigendecomposition failed");
  out.sigma = std::max(0.0, -aes.eigenvalues().minCoeff());
  const vec shifted = aes.eigenvalues().array() + out.sigma;
  const mat reg_aug =
      aes.eigenvectors() * shifted.asDiagonal() * aes.eigenvectors().transpose() / (alpha * alpha);
  out.regularized = reg_aug.topLeftCorner(n, n);
  out.regularized = (0.5 * (out.regularized + out.regularized.transpose())).eval();
  out.alpha = alpha;
  out.condition = condition_number(out.regularized);

  const Eigen::LLT<mat> llt(out.regularized);
  if (llt.info() == Eigen::Success) {
    out.step = -llt.solve(g);
  } else {
    // Singular block (gradient orthogonal to the lowest eigenvector): solve
    // in the eigenbasis of the block itself, dropping null directions.
    const Eigen::SelfAdjointEigenSolver<mat> res(out.regularized);
    const vec &mu = res.eigenvalues();
    const double floor = mu.cwiseAbs().maxCoeff() * machine_eps * n;
    vec coeff = res.eigenvectors().transpose() * g;
    for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff[i] = mu[i] > floor ? coeff[i] / mu[i] : 0.0;
    out.step = -res.eigenvectors() * coeff;
  }
  return out;
}

}  // namespace grape::optim
