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

#include "grape/optim/optimizer.hpp"

#include <cmath>
#include <deque>

namespace grape::optim {

namespace {

struct method_name {
  method m;
  std::string_view name;
};

constexpr method_name method_names[] = {
    {method::grad_descent, "grad_descent"},
    {method::lbfgs, "lbfgs"},
    {method::bfgs, "bfgs"},
    {method::newton_trm, "newton_trm"},
    {method::newton_rfo, "newton_rfo"},
};

double inf_norm(const vec &v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Limited-memory inverse Hessian product by the two-loop recursion.
class lbfgs_memory {
 public:
  explicit lbfgs_memory(std::size_t capacity) : capacity_(capacity) {}

  bool empty() const { return pairs_.empty(); }
  void clear() { pairs_.clear(); }

  void push(vec s, vec y) {
    const double sy = s.dot(y);
    if (!(sy > 0.0)) return;
    pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
    if (pairs_.size() > capacity_) pairs_.pop_front();
  }

  vec apply(const vec &g) const {
    vec q = g;
    std::vector<double> a(pairs_.size());
    for (std::size_t i = pairs_.size(); i-- > 0;) {
      a[i] = pairs_[i].rho * pairs_[i].s.dot(q);
      q -= a[i] * pairs_[i].y;
    }
    const auto &last = pairs_.back();
    vec r = (last.s.dot(last.y) / last.y.squaredNorm()) * q;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const double b = pairs_[i].rho * pairs_[i].y.dot(r);
      r += (a[i] - b) * pairs_[i].s;
    }
    return r;
  }

 private:
  struct pair {
    vec s;
    vec y;
    double rho;
  };
  std::size_t capacity_;
  std::deque<pair> pairs_;
};

// Dense inverse Hessian approximation with the BFGS update.
class bfgs_inverse {
 public:
  bool empty() const { return !started_; }
  void clear() { started_ = false; }

  void push(const vec &s, const vec &y) {
    const double sy = s.dot(y);
    if (!(sy > 0.0)) return;
    if (!started_) {
      h_ = mat::Identity(s.size(), s.size()) * (sy / y.squaredNorm());
      started_ = true;
    }
    const double rho = 1.0 / sy;
    const vec hy = h_ * y;
    const double yhy = y.dot(hy);
    h_.noalias() += (rho + rho * rho * yhy) * (s * s.transpose());
    h_.noalias() -= rho * (hy * s.transpose() + s * hy.transpose());
  }

  vec apply(const vec &g) const { return h_ * g; }

 private:
  bool started_ = false;
  mat h_;
};

}  // namespace

std::string to_string(method m) {
  for (const auto &e : method_names)
    if (e.m == m) return std::string(e.name);
  return "unknown";
}

method parse_method(std::string_view name) {
  for (const auto &e : method_names)
    if (e.name == name) return e.m;
  throw invalid_input("unknown optimisation method '" + std::string(name) + "'");
}

bool uses_hessian(method m) { return m == method::newton_trm || m == method::newton_rfo; }

std::string to_string(termination t) {
  switch (t) {
    case termination::gradient_tolerance: return "gradient_tolerance";
    case termination::target_reached: return "target_reached";
    case termination::iteration_limit: return "iteration_limit";
    case termination::trajectory_budget: return "trajectory_budget";
    case termination::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

void optimizer_settings::validate() const {
  if (!(grad_tol >= 0.0)) throw invalid_input("grad_tol must be non-negative");
  if (lbfgs_memory < 1) throw invalid_input("lbfgs_memory must be at least 1");
  if (trajectory_budget < 1) throw invalid_input("trajectory_budget must be positive");
  regularizer.validate();
  line_search.validate();
}

newton_step newton_direction(const mat &h, const vec &g, hessian_fix fix,
                             const regularizer_settings &settings) {
  if (g.size() != h.rows()) throw invalid_input("gradient length does not match Hessian");
  newton_step out;
  if (auto l = try_cholesky(h)) {
    const vec z = l->triangularView<Eigen::Lower>().solve(g);
    out.direction = -l->transpose().triangularView<Eigen::Upper>().solve(z);
    out.condition = condition_number(h);
    return out;
  }
  out.regularized = true;
  switch (fix) {
    case hessian_fix::cholesky_only:
      throw numerical_error("Hessian is not positive definite");
    case hessian_fix::trm: {
      const auto r = trm_regularize(h, settings);
      out.direction = -Eigen::LLT<mat>(r.hessian).solve(g);
      out.sigma = r.sigma;
      out.alpha = std::numeric_limits<double>::quiet_NaN();
      out.condition = condition_number(r.hessian);
      return out;
    }
    case hessian_fix::rfo: {
      const auto r = rfo_step(h, g, settings);
      out.direction = r.step;
      out.sigma = r.sigma;
      out.alpha = r.alpha;
      out.condition = r.condition;
      return out;
    }
  }
  throw invalid_input("unknown Hessian regularisation");
}

bool satisfies_wolfe(const iteration_record &row, double c1, double c2) {
  return row.f_accepted <= row.f_start + c1 * row.step_length * row.slope_start &&
         std::abs(row.slope_accepted) <= c2 * std::abs(row.slope_start);
}

optim_result optimize(const objective_fn &f, const vec &x0, const optimizer_settings &settings) {
  settings.validate();
  if (!x0.allFinite()) throw invalid_input("initial point has non-finite entries");
  const method m = settings.algorithm;
  const int order = uses_hessian(m) ? 2 : 1;
  const hessian_fix fix = m == method::newton_trm ? hessian_fix::trm : hessian_fix::rfo;

  optim_result res;
  res.log.c1 = settings.line_search.c1;
  res.log.c2 = settings.line_search.c2;
  res.x = x0;
  res.at_x = f(x0, order);
  res.trajectories = res.at_x.cost;
  std::size_t last_cost = res.at_x.cost;
  if (!std::isfinite(res.at_x.value) || !res.at_x.gradient.allFinite())
    throw numerical_error("objective is not finite at the initial point");

  {
    iteration_record row;
    row.value = res.at_x.value;
    row.penalty = res.at_x.penalty;
    row.grad_inf = inf_norm(res.at_x.gradient);
    row.trajectories = res.trajectories;
    res.log.rows.push_back(row);
    if (settings.on_iteration) settings.on_iteration(row);
  }

  lbfgs_memory lbfgs(settings.lbfgs_memory);
  bfgs_inverse bfgs;
  double prev_step = 0.0;
  double prev_slope = 0.0;

  // Charges every trial to the running total so the budget check sees
  // line-search evaluations as they happen.
  const objective_fn counted = [&](const vec &x, int ord) {
    evaluation e = f(x, ord);
    res.trajectories += e.cost;
    return e;
  };
  const auto may_evaluate = [&] {
    return res.trajectories + last_cost <= settings.trajectory_budget;
  };

  for (std::size_t iter = 0;; ++iter) {
    const vec &g = res.at_x.gradient;
    if (inf_norm(g) < settings.grad_tol) {
      res.reason = termination::gradient_tolerance;
      break;
    }
    if (settings.target_value && res.at_x.value <= *settings.target_value) {
      res.reason = termination::target_reached;
      break;
    }
    if (iter >= settings.max_iterations) {
      res.reason = termination::iteration_limit;
      break;
    }
    if (!may_evaluate()) {
      res.reason = termination::trajectory_budget;
      break;
    }

    iteration_record row;
    vec d;
    double step0 = 1.0;
    bool steepest = false;
    switch (m) {
      case method::grad_descent:
        d = -g;
        steepest = true;
        break;
      case method::lbfgs:
        steepest = lbfgs.empty();
        d = steepest ? vec(-g) : vec(-lbfgs.apply(g));
        break;
      case method::bfgs:
        steepest = bfgs.empty();
        d = steepest ? vec(-g) : vec(-bfgs.apply(g));
        break;
      case method::newton_trm:
      case method::newton_rfo: {
        auto step = newton_direction(*res.at_x.hessian, g, fix, settings.regularizer);
        d = std::move(step.direction);
        row.sigma = step.sigma;
        row.alpha = step.regularized ? step.alpha : 1.0;
        row.condition = step.condition;
        break;
      }
    }
    double slope = g.dot(d);
    if (!(slope < 0.0) && (m == method::lbfgs || m == method::bfgs)) {
      lbfgs.clear();
      bfgs.clear();
      d = -g;
      steepest = true;
      slope = g.dot(d);
    }
    if (!(slope < 0.0)) throw numerical_error("search direction is not a descent direction");
    if (steepest && settings.adaptive_initial_step) {
      step0 = prev_slope < 0.0 ? prev_step * prev_slope / slope : 1.0 / g.norm();
      if (!(step0 > 0.0) || !std::isfinite(step0)) step0 = 1.0 / g.norm();
    }

    auto ls = line_search(counted, res.x, d, res.at_x.value, slope, order, step0,
                          settings.line_search, may_evaluate);
    // Only strong Wolfe points are accepted. A failed quasi-Newton or Newton
    // direction gets one retry along the steepest descent direction.
    if (ls.status != line_search_status::wolfe && ls.status != line_search_status::budget &&
        !steepest) {
      lbfgs.clear();
      bfgs.clear();
      d = -g;
      steepest = true;
      slope = g.dot(d);
      row.sigma = row.alpha = row.condition = std::numeric_limits<double>::quiet_NaN();
      const std::size_t first_evals = ls.evals;
      ls = line_search(counted, res.x, d, res.at_x.value, slope, order, 1.0,
                       settings.line_search, may_evaluate);
      ls.evals += first_evals;
    }
    if (ls.status != line_search_status::wolfe) {
      res.reason = ls.status == line_search_status::budget ? termination::trajectory_budget
                                                           : termination::line_search_failure;
      break;
    }
    last_cost = ls.point->cost;

    const vec s = ls.step * d;
    const vec y = ls.point->gradient - g;
    if (m == method::lbfgs) lbfgs.push(s, y);
    if (m == method::bfgs) bfgs.push(s, y);
    prev_step = ls.step;
    prev_slope = slope;

    row.iteration = iter + 1;
    row.step_norm = s.norm();
    row.linesearch_evals = ls.evals;
    row.step_length = ls.step;
    row.f_start = res.at_x.value;
    row.slope_start = slope;
    row.f_accepted = ls.point->value;
    row.slope_accepted = ls.slope;
    row.wolfe = ls.status == line_search_status::wolfe;

    res.x += s;
    res.at_x = std::move(*ls.point);
    row.value = res.at_x.value;
    row.penalty = res.at_x.penalty;
    row.grad_inf = inf_norm(res.at_x.gradient);
    row.trajectories = res.trajectories;
    res.log.rows.push_back(row);
    if (settings.on_iteration) settings.on_iteration(row);
  }
  return res;
}

}  // namespace grape::optim
