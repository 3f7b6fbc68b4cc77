#pragma once

#include "oco/core/decision_space.hpp"
#include "oco/core/dynamics.hpp"
#include "oco/core/environment.hpp"
#include "oco/core/loss.hpp"
#include "oco/core/rng.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

namespace oco {

enum class AdversaryKind { finite, discounted };

/// Oblivious block adversary on X = [-1, 1]. Rounds are split into blocks
/// of length m, block n covering rounds m(n-1)+1 .. mn, each with its own
/// Rademacher sign. The first block is silent; afterwards f_t sums the
/// history entries of the decisions x_{t-m+1} .. x_{first(t)}, where
/// first(t) is the first round of t's block, so decisions made after the
/// sign could be inferred never enter the loss of that block.
struct BlockAdversary {
  AdversaryKind kind = AdversaryKind::finite;
  int m = 1;
  double p = 2.0;
  double L = 1.0;
  double rho = 0.0;
  long T = 1;
  std::vector<int> signs;  // signs[n-1] = eps_n

  static BlockAdversary finite(int m, double p, double L, long T, std::uint64_t seed) {
    require(m >= 1 && p >= 1.0 && L >= 0.0 && T >= 1, "finite adversary needs m >= 1, p >= 1, L >= 0, T >= 1");
    BlockAdversary a;
    a.kind = AdversaryKind::finite;
    a.m = m;
    a.p = p;
    a.L = L;
    a.T = T;
    a.draw(seed);
    return a;
  }

  /// m = ceil(1 / (1 - rho)), history norm is the plain 2-norm.
  static BlockAdversary discounted(double rho, double L, long T, std::uint64_t seed) {
    require(rho >= 0.5 && rho < 1.0, "discounted adversary needs rho in [0.5, 1)");
    require(L >= 0.0 && T >= 1, "discounted adversary needs L >= 0, T >= 1");
    BlockAdversary a;
    a.kind = AdversaryKind::discounted;
    a.rho = rho;
    a.m = static_cast<int>(std::ceil(1.0 / (1.0 - rho) - 1e-12));
    a.p = 2.0;
    a.L = L;
    a.T = T;
    a.draw(seed);
    return a;
  }

  long blocks() const { return (T + m - 1) / m; }
  long block_of(long t) const { return (t + m - 1) / m; }
  long first_round(long n) const { return static_cast<long>(m) * (n - 1) + 1; }
  int sign(long n) const { return signs.at(n - 1); }

  /// L m^((1-p)/p) for finite memory, L m^(-1/2) for discounted.
  double scale() const {
    const double mm = static_cast<double>(m);
    return kind == AdversaryKind::finite ? L * std::pow(mm, (1.0 - p) / p) : L / std::sqrt(mm);
  }

  Dynamics dynamics() const {
    return kind == AdversaryKind::finite ? Dynamics::finite_memory(m, 1, p) : Dynamics::discounted(rho, 1, 2.0);
  }

  /// Circ coefficient of f_t per unit sign: f~_t(x) = eps * scale * unit_circ(t) * x.
  double unit_circ(long t) const {
    if (t <= m) return 0.0;
    const long j = t - first_round(block_of(t));
    if (kind == AdversaryKind::finite) return static_cast<double>(m - j);
    return std::pow(rho, static_cast<double>(j)) * (1.0 - std::pow(rho, m)) / (1.0 - rho);
  }

 private:
  void draw(std::uint64_t seed) {
    CounterRng rng(seed, 0xad7e);
    signs.resize(blocks());
    for (auto& s : signs) s = rng.rademacher();
  }
};

/// f_t for the finite-memory construction: eps_n L m^((1-p)/p) sum of
/// history blocks at lags j .. m-1, j = t - first(t); zero for t <= m.
inline LossPtr finite_memory_loss(const BlockAdversary& adv, long t) {
  require(adv.kind == AdversaryKind::finite, "finite_memory_loss needs a finite adversary");
  require(t >= 1 && t <= adv.T, "round out of range");
  if (t <= adv.m) return make_zero_loss();
  const long n = adv.block_of(t);
  const long j = t - adv.first_round(n);
  const double c = adv.sign(n) * adv.scale();
  std::vector<Vec> coef(adv.m, Vec::Zero(1));
  for (long l = j; l < adv.m; ++l) coef[l](0) = c;
  return make_affine_loss(History(std::move(coef)), 0.0, adv.L);
}

/// f_t for the discounted construction: eps_n L m^(-1/2) sum of history
/// blocks at lags j .. j+m-1, i.e. rho^(k+j) x_{first(t)-k} for k < m.
inline LossPtr discounted_loss(const BlockAdversary& adv, long t) {
  require(adv.kind == AdversaryKind::discounted, "discounted_loss needs a discounted adversary");
  require(t >= 1 && t <= adv.T, "round out of range");
  if (t <= adv.m) return make_zero_loss();
  const long n = adv.block_of(t);
  const long j = t - adv.first_round(n);
  const double c = adv.sign(n) * adv.scale();
  std::vector<Vec> coef(j + adv.m, Vec::Zero(1));
  for (long l = j; l < j + adv.m; ++l) coef[l](0) = c;
  return make_affine_loss(History(std::move(coef)), 0.0, adv.L);
}

inline LossPtr adversary_loss(const BlockAdversary& adv, long t) {
  return adv.kind == AdversaryKind::finite ? finite_memory_loss(adv, t) : discounted_loss(adv, t);
}

/// min over x in [-1, 1] of sum_t f~_t(x) = -|sum_n eps_n c_n|, c_n the
/// block's summed circ coefficient (finite, full block: scale (m^2+m)/2).
inline double adversary_benchmark(const BlockAdversary& adv) {
  double total = 0.0;
  for (long t = adv.m + 1; t <= adv.T; ++t) total += adv.sign(adv.block_of(t)) * adv.unit_circ(t);
  return -std::abs(adv.scale() * total);
}

class AdversaryEnvironment final : public Environment {
 public:
  explicit AdversaryEnvironment(BlockAdversary adv)
      : adv_(std::move(adv)), dyn_(adv_.dynamics()), X_(DecisionSpace::interval(-1.0, 1.0)) {}

  const Dynamics& dynamics() const override { return dyn_; }
  const DecisionSpace& space() const override { return X_; }
  long horizon() const override { return adv_.T; }
  LossPtr loss(long t) const override { return adversary_loss(adv_, t); }
  double lipschitz() const override { return adv_.L; }
  std::string name() const override {
    return adv_.kind == AdversaryKind::finite ? "adversary_finite" : "adversary_discounted";
  }
  const BlockAdversary& adversary() const { return adv_; }

 private:
  BlockAdversary adv_;
  Dynamics dyn_;
  DecisionSpace X_;
};

/// Rows "trial,block,sign" (header written by the caller).
inline void write_signs_csv(std::ostream& os, long trial, const BlockAdversary& adv) {
  for (long n = 1; n <= adv.blocks(); ++n) os << trial << ',' << n << ',' << adv.sign(n) << '\n';
}

}  // namespace oco
