#pragma once

#include "oco/core/decision_space.hpp"
#include "oco/core/types.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace oco {

/// value(x, grad) returns phi(x) and, when grad != nullptr, writes Euclidean partials.
using SmoothObjective = std::function<double(const Vec&, Vec*)>;

struct SolverOptions {
  double tol = 1e-8;
  int max_iters = 10000;
  double initial_step = 1.0;
};

struct SolverResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // gradient-mapping norm at termination
};

/// Accelerated projected gradient (FISTA) in the W-geometry of the space,
/// with backtracking on the step and function-value restart. Terminates when
/// the gradient mapping ||(y - P(y - s W^-1 grad)) / s||_W <= tol.
inline SolverResult projected_minimize(const SmoothObjective& phi, const DecisionSpace& X, const Vec& start,
                                       const SolverOptions& opt = {}) {
  require(opt.tol > 0.0, "solver tolerance must be > 0");
  Vec x = X.project(start);
  Vec grad(x.size());
  double fx = phi(x, &grad);
  Vec y = x, gy = grad;
  double fy = fx;
  double theta = 1.0;
  double step = opt.initial_step;

  Vec best = x;
  double best_f = fx;

  for (int it = 1; it <= opt.max_iters; ++it) {
    Vec x_next, g_next(x.size());
    double f_next = 0.0;
    for (int bt = 0; bt < 200; ++bt) {
      x_next = X.project(y - step * X.riesz(gy));
      f_next = phi(x_next, nullptr);
      const Vec d = x_next - y;
      const double model = fy + gy.dot(d) + 0.5 / step * X.inner(d, d);
      if (f_next <= model + 1e-12 * std::max(1.0, std::abs(fy))) break;
      step *= 0.5;
    }
    const double residual = X.norm(x_next - y) / step;
    if (f_next < best_f) {
      best_f = f_next;
      best = x_next;
    }
    if (residual <= opt.tol) {
      return {x_next, f_next, it, residual};
    }

    if (f_next > fx && theta > 1.0) {
      // Restart: drop momentum and take a plain step from x. Without
      // momentum the step is accepted, since a rise is then only rounding.
      theta = 1.0;
      y = x;
      fy = phi(y, &gy);
      continue;
    }
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    y = x_next + ((theta - 1.0) / theta_next) * (x_next - x);
    theta = theta_next;
    x = std::move(x_next);
    fx = f_next;
    fy = phi(y, &gy);
  }
  throw ConvergenceError("projected gradient solver hit its iteration cap", best, best_f);
}

}  // namespace oco
