#pragma once

#include "oco/core/dynamics.hpp"
#include "oco/core/history.hpp"
#include "oco/core/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace oco {

/// h_t = A h_{t-1} + B x_t.
inline History history_update(const History& h, const Vec& x, const Dynamics& dyn) {
  History next = dyn.apply_A(h);
  next += dyn.apply_B(x);
  return next;
}

/// sum_{k<t} A^k B x by Horner: h <- A h + B x, t-1 times after h = B x.
inline History steady_history(const Vec& x, long t, const Dynamics& dyn) {
  if (t <= 0) return {};
  const History bx = dyn.apply_B(x);
  History h = bx;
  for (long k = 1; k < t; ++k) {
    h = dyn.apply_A(h);
    h += bx;
  }
  return h;
}

/// Adjoint of x -> sum_{k<t} A^k B x applied to a cotangent g:
/// B^T sum_{k<t} (A^T)^k g. Stops early once (A^T)^k g vanishes, which
/// happens after |g| steps for every sequence kind.
inline Vec circ_adjoint(const History& g, long t, const Dynamics& dyn) {
  Vec out = Vec::Zero(dyn.decision_dim());
  if (t <= 0 || g.empty()) return out;
  History term = g;
  History acc = g;
  for (long k = 1; k < t; ++k) {
    term = dyn.apply_A_adjoint(term);
    if (term.empty()) break;
    acc += term;
  }
  return dyn.apply_B_adjoint(acc);
}

/// Coefficients of an affine circ loss: f~_t(x) = offset + <circ_coefficient, x>.
inline Vec circ_coefficient(const AffineForm& form, long t, const Dynamics& dyn) {
  return circ_adjoint(form.coef, t, dyn);
}

struct CircEval {
  double value;
  Vec grad;
};

/// f~_t(x) = f_t(sum_{k<t} A^k B x) and a subgradient by the chain rule.
inline CircEval circ_loss(const HistoryLoss& f, const Vec& x, long t, const Dynamics& dyn) {
  if (auto form = f.affine()) {
    Vec c = circ_coefficient(*form, t, dyn);
    const double v = form->offset + c.dot(x);
    return {v, std::move(c)};
  }
  const History h = steady_history(x, t, dyn);
  return {f.value(h), circ_adjoint(f.gradient(h), t, dyn)};
}

/// Incremental arguments Phi_s(x) = sum_{k<s} A^k B x for s = 1, 2, ...:
/// Gamma_0 = B x, Phi_1 = Gamma_0, Gamma_s = A Gamma_{s-1}, Phi_s = Phi_{s-1} + Gamma_{s-1}.
/// One B application in total and one A application per step.
class PrefixSequence {
 public:
  PrefixSequence(const Vec& x, const Dynamics& dyn) : dyn_(&dyn), gamma_(dyn.apply_B(x)) {}

  /// Returns Phi_{s+1} where s is the number of previous calls.
  const History& next() {
    if (s_ > 0) {
      gamma_ = dyn_->apply_A(gamma_);
      ++a_applications_;
    }
    phi_ += gamma_;
    ++s_;
    return phi_;
  }

  long index() const { return s_; }
  std::uint64_t a_applications() const { return a_applications_; }
  const History& current() const { return phi_; }

 private:
  const Dynamics* dyn_;
  History gamma_;
  History phi_;
  long s_ = 0;
  std::uint64_t a_applications_ = 0;
};

/// Weighted lp norm over block norms: (sum_k (xi_k ||y_k||)^p)^{1/p}.
inline double weighted_norm(const History& h, const Dynamics& dyn) {
  const double p = dyn.p();
  if (!(p >= 1.0)) throw InvalidParameter("weighted_norm requires p >= 1");
  double s = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) s += std::pow(dyn.xi(k) * dyn.block_norm(h[k]), p);
  return std::pow(s, 1.0 / p);
}

/// Dual of weighted_norm, for cotangents: (sum_k (||g_k||_* / xi_k)^q)^{1/q}.
/// A block with xi_k = 0 and nonzero g_k makes the dual norm infinite.
inline double dual_weighted_norm(const History& g, const Dynamics& dyn) {
  const double p = dyn.p();
  if (!(p >= 1.0)) throw InvalidParameter("dual_weighted_norm requires p >= 1");
  double worst = 0.0, s = 0.0;
  const double q = p == 1.0 ? 0.0 : p / (p - 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double gn = dyn.dual_block_norm(g[k]);
    if (gn == 0.0) continue;
    const double w = dyn.xi(k);
    if (w == 0.0) return std::numeric_limits<double>::infinity();
    if (p == 1.0) worst = std::max(worst, gn / w);
    else s += std::pow(gn / w, q);
  }
  return p == 1.0 ? worst : std::pow(s, 1.0 / q);
}

}  // namespace oco
