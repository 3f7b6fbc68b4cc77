#pragma once

#include "oco/core/decision_space.hpp"

namespace oco {

/// R(x) = (alpha/2) ||x||_W^2 on a decision space. alpha-strongly convex in
/// the decision norm; D = sup R - inf R over the feasible set (inf attained
/// at 0, which every built-in set contains).
class SquaredNorm {
 public:
  SquaredNorm() = default;
  explicit SquaredNorm(double alpha) : alpha_(alpha) { require(alpha > 0.0, "regularizer alpha must be > 0"); }

  double alpha() const { return alpha_; }
  double value(const DecisionSpace& X, const Vec& x) const { return 0.5 * alpha_ * X.inner(x, x); }
  /// Euclidean partials: alpha * W x.
  Vec gradient(const DecisionSpace& X, const Vec& x) const { return alpha_ * (X.weights().array() * x.array()).matrix(); }
  double diameter(const DecisionSpace& X) const { return 0.5 * alpha_ * X.max_sq_norm(); }

  /// argmin_x <G, x> + R(x)/eta over X, in closed form.
  Vec linear_argmin(const DecisionSpace& X, const Vec& G, double eta) const {
    return X.project(-(eta / alpha_) * X.riesz(G));
  }

 private:
  double alpha_ = 1.0;
};

}  // namespace oco
