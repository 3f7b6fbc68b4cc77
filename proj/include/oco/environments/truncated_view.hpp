#pragma once

#include "oco/core/circ.hpp"
#include "oco/core/dynamics.hpp"
#include "oco/core/loss.hpp"
#include "oco/learners/runner.hpp"

#include <string>

namespace oco {

/// The finite-memory baseline OCO-FM-m: the learner models the problem as
/// OCO with memory m, i.e. it keeps the last m decisions (y_0 .. y_{m-1})
/// and sees f^(m)(y) = f(sum_{k<m} A^k B y_k) under the true (A, B).
/// Losses and regret are still accounted in the true environment.
inline LossPtr truncate_memory(const LossPtr& f, const Dynamics& truth, int m) {
  if (auto form = f->affine()) {
    // Block k of the coefficient is B^T (A^T)^k c.
    std::vector<Vec> coef;
    History term = form->coef;
    for (int k = 0; k < m && !term.empty(); ++k) {
      coef.push_back(truth.apply_B_adjoint(term));
      term = truth.apply_A_adjoint(term);
    }
    return make_affine_loss(History(std::move(coef)), form->offset, f->lipschitz());
  }
  auto lift = [truth](const History& y) {
    History z;
    for (std::size_t k = y.size(); k-- > 0;) {
      z = truth.apply_A(z);
      z += truth.apply_B(y[k]);
    }
    return z;
  };
  return std::make_shared<FunctionLoss>(
      [f, lift](const History& y) { return f->value(lift(y)); },
      [f, lift, truth, m](const History& y) {
        History term = f->gradient(lift(y));
        std::vector<Vec> g;
        for (int k = 0; k < m && !term.empty(); ++k) {
          g.push_back(truth.apply_B_adjoint(term));
          term = truth.apply_A_adjoint(term);
        }
        return History(std::move(g));
      },
      f->lipschitz());
}

inline LearnerModel truncated_memory_model(const Dynamics& truth, int m) {
  require(m >= 1, "memory length must be >= 1");
  LearnerModel model;
  model.name = "OCO-FM-" + std::to_string(m);
  model.dynamics = Dynamics::finite_memory(m, truth.decision_dim(), 2.0);
  model.wrap = [truth, m](const LossPtr& f) { return truncate_memory(f, truth, m); };
  return model;
}

}  // namespace oco
