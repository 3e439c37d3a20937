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

#include "grape/optim/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grape::optim {

void line_search_settings::validate() const {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw invalid_input("need 0 < c1 < c2 < 1");
  if (max_evals < 1) throw invalid_input("max_evals must be at least 1");
  if (!(expansion > 1.0)) throw invalid_input("expansion must exceed 1");
  if (!(max_step > 0.0)) throw invalid_input("max_step must be positive");
}

std::optional<double> cubic_minimizer(double a, double fa, double ga, double b, double fb,
                                      double gb) {
  if (a == b) return std::nullopt;
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  if (!(disc >= 0.0)) return std::nullopt;
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = gb - ga + 2.0 * d2;
  if (denom == 0.0) return std::nullopt;
  const double t = b - (b - a) * (gb + d2 - d1) / denom;
  if (!std::isfinite(t)) return std::nullopt;
  return t;
}

namespace {

struct trial {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;
  std::optional<evaluation> eval;
};

class searcher {
 public:
  searcher(const objective_fn &f, const vec &x, const vec &d, double f0, double slope0, int order,
           const line_search_settings &settings, const std::function<bool()> &may_evaluate)
      : f_(f), x_(x), d_(d), f0_(f0), slope0_(slope0), order_(std::max(order, 1)),
        settings_(settings), may_evaluate_(may_evaluate) {}

  line_search_result run(double initial_step) {
    trial prev{0.0, f0_, slope0_, std::nullopt};
    double step = std::min(initial_step, settings_.max_step);
    for (bool first = true;; first = false) {
      auto cur = evaluate(step);
      if (!cur) return fallback(stop_);
      if (!armijo(*cur) || (!first && cur->value >= prev.value)) return zoom(prev, *cur);
      if (curvature(*cur)) return accept(*cur);
      if (cur->slope >= 0.0) return zoom(*cur, prev);
      if (step >= settings_.max_step) return fallback(line_search_status::stalled);
      // Extrapolate with the cubic through the last two points, kept within
      // [2 a_i - a_{i-1}, a_i + tau (a_i - a_{i-1})].
      const double grow = step - prev.step;
      const double lo = step + grow;
      const double hi = step + settings_.expansion * grow;
      double next = hi;
      if (auto c = cubic_minimizer(prev.step, prev.value, prev.slope, step, cur->value, cur->slope))
        if (*c > step) next = std::clamp(*c, lo, hi);
      prev = std::move(*cur);
      step = std::min(next, settings_.max_step);
    }
  }

 private:
  bool armijo(const trial &t) const {
    return t.value <= f0_ + settings_.c1 * t.step * slope0_;
  }
  bool curvature(const trial &t) const {
    return std::abs(t.slope) <= settings_.c2 * std::abs(slope0_);
  }

  std::optional<trial> evaluate(double step) {
    if (evals_ >= settings_.max_evals) {
      stop_ = line_search_status::max_evals;
      return std::nullopt;
    }
    if (may_evaluate_ && !may_evaluate_()) {
      stop_ = line_search_status::budget;
      return std::nullopt;
    }
    const vec xt = x_ + step * d_;
    evaluation e = f_(xt, order_);
    ++evals_;
    cost_ += e.cost;
    trial t;
    t.step = step;
    t.value = e.value;
    t.slope = std::isfinite(e.value) ? e.gradient.dot(d_) : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(t.value) || !std::isfinite(t.slope)) {
      // Treat overflow as an infinitely bad point so the bracket shrinks.
      t.value = std::numeric_limits<double>::infinity();
      t.slope = std::numeric_limits<double>::infinity();
      return t;
    }
    t.eval = std::move(e);
    if (!best_ || t.value < best_->value) best_ = t;
    return t;
  }

  line_search_result zoom(trial lo, trial hi) {
    for (;;) {
      const double left = std::min(lo.step, hi.step);
      const double right = std::max(lo.step, hi.step);
      const double width = right - left;
      if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, right))
        return fallback(line_search_status::stalled);
      double step = 0.5 * (left + right);
      if (std::isfinite(hi.value)) {
        if (auto c = cubic_minimizer(lo.step, lo.value, lo.slope, hi.step, hi.value, hi.slope))
          step = *c;
      }
      step = std::clamp(step, left + 0.1 * width, right - 0.1 * width);
      auto cur = evaluate(step);
      if (!cur) return fallback(stop_);
      if (!armijo(*cur) || cur->value >= lo.value) {
        hi = std::move(*cur);
        continue;
      }
      if (curvature(*cur)) return accept(*cur);
      if (cur->slope * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(*cur);
    }
  }

  line_search_result accept(const trial &t) {
    line_search_result r = base();
    r.status = line_search_status::wolfe;
    r.step = t.step;
    r.slope = t.slope;
    r.point = t.eval;
    return r;
  }

  // Best strictly decreasing point seen so far, or no step at all.
  line_search_result fallback(line_search_status status) {
    line_search_result r = base();
    r.status = status;
    if (best_ && best_->value < f0_) {
      r.step = best_->step;
      r.slope = best_->slope;
      r.point = best_->eval;
      if (armijo(*best_) && curvature(*best_)) r.status = line_search_status::wolfe;
    }
    return r;
  }

  line_search_result base() const {
    line_search_result r;
    r.evals = evals_;
    r.cost = cost_;
    return r;
  }

  const objective_fn &f_;
  const vec &x_;
  const vec &d_;
  double f0_;
  double slope0_;
  int order_;
  const line_search_settings &settings_;
  const std::function<bool()> &may_evaluate_;
  std::size_t evals_ = 0;
  std::size_t cost_ = 0;
  std::optional<trial> best_;
  line_search_status stop_ = line_search_status::max_evals;
};

}  // namespace

line_search_result line_search(const objective_fn &f, const vec &x, const vec &d, double f0,
                               double slope0, int order, double initial_step,
                               const line_search_settings &settings,
                               const std::function<bool()> &may_evaluate) {
  settings.validate();
  if (x.size() != d.size()) throw invalid_input("direction length does not match x");
  if (!std::isfinite(f0) || !std::isfinite(slope0)) throw numerical_error("non-finite start point");
  if (!(slope0 < 0.0)) throw invalid_input("line search direction is not a descent direction");
  if (!(initial_step > 0.0) || !std::isfinite(initial_step))
    throw invalid_input("initial step must be positive");
  return searcher(f, x, d, f0, slope0, order, settings, may_evaluate).run(initial_step);
}

}  // namespace grape::optim
