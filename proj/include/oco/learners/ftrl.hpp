#pragma once

#include "oco/core/circ.hpp"
#include "oco/core/decision_space.hpp"
#include "oco/core/dynamics.hpp"
#include "oco/core/loss.hpp"
#include "oco/learners/regularizer.hpp"
#include "oco/learners/solver.hpp"

#include <limits>
#include <map>
#include <vector>

namespace oco {

struct LearnerConfig {
  double eta = 0.1;
  int batch_size = 1;
  double inner_tol = 1e-8;
  int inner_max_iters = 10000;

  void validate() const {
    require(eta > 0.0 && std::isfinite(eta), "step size eta must be > 0");
    require(batch_size >= 1, "batch size S must be >= 1");
    require(inner_tol > 0.0, "inner_tol must be > 0");
    require(inner_max_iters >= 1, "inner_max_iters must be >= 1");
  }
  SolverOptions solver() const { return {inner_tol, inner_max_iters, 1.0}; }
};

/// Weighted sum of circ losses sum_s w_s f~_s(x) under fixed dynamics.
/// Affine losses collapse into one coefficient vector; the rest are kept
/// and evaluated through the incremental prefix sequence, so one value and
/// gradient evaluation costs O(t) applications of A and A^T.
class CircSum {
 public:
  explicit CircSum(Dynamics dyn) : dyn_(std::move(dyn)), lin_(Vec::Zero(dyn_.decision_dim())) {}

  /// Adds w * f~_round. Returns the circ coefficient for affine losses, empty otherwise.
  Vec add(long round, const LossPtr& f, double weight = 1.0) {
    require(round >= 1, "round index must be >= 1");
    ++count_;
    if (auto form = f->affine()) {
      Vec c = circ_coefficient(*form, round, dyn_);
      lin_ += weight * c;
      offset_ += weight * form->offset;
      return c;
    }
    nonaffine_[round].push_back({f, weight});
    return {};
  }

  const Dynamics& dynamics() const { return dyn_; }
  bool is_affine() const { return nonaffine_.empty(); }
  const Vec& linear() const { return lin_; }
  double offset() const { return offset_; }
  long count() const { return count_; }

  double value(const Vec& x, Vec* grad) const {
    double v = offset_ + lin_.dot(x);
    if (grad) *grad = lin_;
    if (nonaffine_.empty()) return v;

    const long smax = nonaffine_.rbegin()->first;
    std::map<long, History> cot;
    PrefixSequence seq(x, dyn_);
    for (long s = 1; s <= smax; ++s) {
      const History& phi = seq.next();
      auto it = nonaffine_.find(s);
      if (it == nonaffine_.end()) continue;
      for (const auto& [f, w] : it->second) {
        v += w * f->value(phi);
        if (grad) cot[s].axpy(w, f->gradient(phi));
      }
    }
    if (grad) {
      // B^T sum_k (A^T)^k S_k with S_k = sum_{s>k} g_s, by Horner from the top.
      History suffix, r;
      for (long k = smax - 1; k >= 0; --k) {
        auto it = cot.find(k + 1);
        if (it != cot.end()) suffix += it->second;
        if (k == smax - 1) r = suffix;
        else {
          r = dyn_.apply_A_adjoint(r);
          r += suffix;
        }
      }
      *grad += dyn_.apply_B_adjoint(r);
    }
    return v;
  }

 private:
  struct Term {
    LossPtr f;
    double w;
  };
  Dynamics dyn_;
  Vec lin_;
  double offset_ = 0.0;
  long count_ = 0;
  std::map<long, std::vector<Term>> nonaffine_;
};

/// argmin_x sum_s w_s f~_s(x) + R(x)/eta over X.
inline Vec ftrl_step(const CircSum& past, const SquaredNorm& R, double eta, const DecisionSpace& X,
                     const SolverOptions& opt = {}, const Vec* warm = nullptr) {
  require(eta > 0.0, "step size eta must be > 0");
  require_shape(X.dim() == past.dynamics().decision_dim(), "decision space does not match dynamics");
  if (past.is_affine()) return R.linear_argmin(X, past.linear(), eta);
  const SmoothObjective phi = [&](const Vec& x, Vec* g) {
    double v = past.value(x, g) + R.value(X, x) / eta;
    if (g) *g += R.gradient(X, x) / eta;
    return v;
  };
  const Vec start = warm ? *warm : Vec::Zero(X.dim());
  return projected_minimize(phi, X, start, opt).x;
}

struct BenchmarkResult {
  Vec x;
  double value = 0.0;
};

/// min_x sum_t f~_t(x) over X. Affine sums use the exact linear minimizer.
inline BenchmarkResult benchmark_solve(const CircSum& sum, const DecisionSpace& X, const SolverOptions& opt = {}) {
  if (sum.is_affine()) {
    Vec x = X.linear_minimizer(sum.linear());
    const double v = sum.offset() + sum.linear().dot(x);
    return {std::move(x), v};
  }
  const SmoothObjective phi = [&](const Vec& x, Vec* g) { return sum.value(x, g); };
  SolverResult r = projected_minimize(phi, X, Vec::Zero(X.dim()), opt);
  return {std::move(r.x), r.value};
}

/// Algorithm state for FTRL (S = 1) and mini-batch FTRL (S >= 2). The
/// decision is recomputed only at rounds t with (t-1) mod S == 0, over the
/// circ losses of the completed batches weighted 1/S.
class FtrlLearner {
 public:
  FtrlLearner(Dynamics model, DecisionSpace X, SquaredNorm R, LearnerConfig cfg)
      : past_(std::move(model)), X_(std::move(X)), R_(R), cfg_(cfg) {
    cfg_.validate();
    require_shape(X_.dim() == past_.dynamics().decision_dim(), "decision space does not match dynamics");
  }

  const Vec& decide(long t) {
    require(t == last_t_ + 1, "rounds must be played in order");
    last_t_ = t;
    const bool batch_start = (t - 1) % cfg_.batch_size == 0;
    if (t == 1) {
      x_ = ftrl_step(past_, R_, cfg_.eta, X_, cfg_.solver(), nullptr);
      switched_ = false;
    } else if (batch_start) {
      Vec next = ftrl_step(past_, R_, cfg_.eta, X_, cfg_.solver(), &x_);
      switched_ = next != x_;
      if (switched_) ++switches_;
      x_ = std::move(next);
    } else {
      switched_ = false;
    }
    return x_;
  }

  /// f_t expressed on the model's history space.
  void observe(long t, const LossPtr& f) {
    require(t == last_t_, "observe must follow decide for the same round");
    const Vec c = past_.add(t, f, 1.0 / cfg_.batch_size);
    if (c.size() > 0) circ_lipschitz_ = std::max(circ_lipschitz_, X_.dual_norm(c));
    else circ_lipschitz_ = std::numeric_limits<double>::quiet_NaN();
  }

  const Vec& current() const { return x_; }
  bool switched() const { return switched_; }
  long switches() const { return switches_; }
  /// Largest observed Lipschitz constant of an affine circ loss (NaN once a non-affine loss is seen).
  double circ_lipschitz() const { return circ_lipschitz_; }
  const LearnerConfig& config() const { return cfg_; }
  const DecisionSpace& space() const { return X_; }
  const Dynamics& dynamics() const { return past_.dynamics(); }

 private:
  CircSum past_;
  DecisionSpace X_;
  SquaredNorm R_;
  LearnerConfig cfg_;
  Vec x_;
  long last_t_ = 0;
  bool switched_ = false;
  long switches_ = 0;
  double circ_lipschitz_ = 0.0;
};

}  // namespace oco
