#pragma once

#include "oco/core/circ.hpp"
#include "oco/core/decision_space.hpp"
#include "oco/core/environment.hpp"
#include "oco/core/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace oco {

/// Location-scale world: z ~ xi + F x, data distribution p_{t+1} = rho p_t + (1 - rho) D(x_t).
/// Only means matter for the supported losses: mu_{t+1} = rho mu_t + (1 - rho)(mu_xi + F x_t).
struct OppWorld {
  double rho = 0.5;
  Mat F;
  Vec mu_xi;
  Vec mu1;

  Eigen::Index d() const { return F.rows(); }
  void validate() const {
    require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
    require_shape(F.rows() == F.cols() && mu_xi.size() == F.rows() && mu1.size() == F.rows(),
                  "OPP world dimensions mismatch");
    require(F.allFinite(), "F must be finite");
  }
  Vec next_mean(const Vec& mu, const Vec& x) const { return rho * mu + (1.0 - rho) * (mu_xi + F * x); }
};

/// l_t(x, z) = a.x + b.z + (ridge/2)||x||^2 + z_curvature ||z||^2. Expectations
/// are exact only when z_curvature == 0 (linear in z).
struct OppLossTerm {
  Vec a;
  Vec b;
  double ridge = 0.0;
  double z_curvature = 0.0;
};

/// f_t(h) = E_{z ~ p_t}[l_t(x_t, z)] on the rho-discounted history
/// h = (x_t, rho x_{t-1}, rho^2 x_{t-2}, ...) with the 1-norm, where
/// mu_t(h) = rho^{t-1} mu_1 + (1 - rho^{t-1}) mu_xi + ((1 - rho)/rho) F sum_{k>=1} h_k.
class OppEnv final : public Environment {
 public:
  OppEnv(OppWorld world, std::vector<OppLossTerm> losses, DecisionSpace X)
      : world_(std::move(world)), losses_(std::move(losses)), X_(std::move(X)),
        dyn_(Dynamics::discounted(world_.rho, world_.d(), 1.0)) {
    world_.validate();
    require(!losses_.empty(), "need at least one round");
    require_shape(X_.dim() == world_.d(), "decision space dimension mismatch");
    for (const auto& l : losses_) {
      if (l.z_curvature != 0.0)
        throw UnsupportedLoss("OPP losses must be linear in z so that the expectation is exact");
      require_shape(l.a.size() == world_.d() && l.b.size() == world_.d(), "OPP loss dimension mismatch");
      require(l.ridge >= 0.0, "ridge must be >= 0");
    }
    normF_ = world_.F.size() ? Eigen::JacobiSVD<Mat>(world_.F).singularValues()(0) : 0.0;
    const double r = std::sqrt(X_.max_sq_norm());
    for (const auto& l : losses_) {
      const double block0 = l.a.norm() + l.ridge * r;
      const double rest = l.b.norm() * (1.0 - world_.rho) / world_.rho * normF_;
      L_ = std::max(L_, std::max(block0, rest));
    }
  }

  const Dynamics& dynamics() const override { return dyn_; }
  const DecisionSpace& space() const override { return X_; }
  long horizon() const override { return static_cast<long>(losses_.size()); }
  std::string name() const override { return "opp"; }
  double lipschitz() const override { return L_; }

  /// Mean of p_t as a function of the history.
  Vec mean(long t, const History& h) const {
    const double rho = world_.rho;
    const double rt = std::pow(rho, static_cast<double>(t - 1));
    Vec mu = rt * world_.mu1 + (1.0 - rt) * world_.mu_xi;
    Vec tail = Vec::Zero(world_.d());
    for (std::size_t k = 1; k < h.size(); ++k) tail += h[k];
    return mu + ((1.0 - rho) / rho) * (world_.F * tail);
  }

  LossPtr loss(long t) const override {
    require(t >= 1 && t <= horizon(), "round out of range");
    const OppLossTerm& l = losses_[t - 1];
    const double rho = world_.rho;
    const double rt = std::pow(rho, static_cast<double>(t - 1));
    const double base = l.b.dot(rt * world_.mu1 + (1.0 - rt) * world_.mu_xi);
    const Vec tail_coef = ((1.0 - rho) / rho) * (world_.F.transpose() * l.b);
    const std::size_t n = static_cast<std::size_t>(t);  // blocks 0 .. t-1 can be nonzero
    if (l.ridge == 0.0) {
      std::vector<Vec> coef(n, tail_coef);
      coef[0] = l.a;
      return make_affine_loss(History(std::move(coef)), base, L_);
    }
    const Vec a = l.a;
    const double ridge = l.ridge;
    const Eigen::Index d = world_.d();
    return std::make_shared<FunctionLoss>(
        [a, ridge, base, tail_coef, n, d](const History& h) {
          const Vec x = h.empty() ? Vec(Vec::Zero(d)) : h[0];
          double v = base + a.dot(x) + 0.5 * ridge * x.squaredNorm();
          for (std::size_t k = 1; k < std::min(h.size(), n); ++k) v += tail_coef.dot(h[k]);
          return v;
        },
        [a, ridge, tail_coef, n, d](const History& h) {
          std::vector<Vec> g(n, tail_coef);
          g[0] = a + (h.empty() ? Vec(Vec::Zero(d)) : Vec(ridge * h[0]));
          return History(std::move(g));
        },
        L_);
  }

  /// Policy regret straight from the distribution recursion: played means
  /// mu_t from the actual decisions, comparator means from a fixed x.
  double direct_loss(const std::vector<Vec>& xs) const {
    Vec mu = world_.mu1;
    double total = 0.0;
    for (long t = 1; t <= horizon(); ++t) {
      const OppLossTerm& l = losses_[t - 1];
      const Vec& x = xs[t - 1];
      total += l.a.dot(x) + l.b.dot(mu) + 0.5 * l.ridge * x.squaredNorm();
      mu = world_.next_mean(mu, x);
    }
    return total;
  }

  const OppWorld& world() const { return world_; }
  const std::vector<OppLossTerm>& losses() const { return losses_; }
  double normF() const { return normF_; }

 private:
  OppWorld world_;
  std::vector<OppLossTerm> losses_;
  DecisionSpace X_;
  Dynamics dyn_;
  double normF_ = 0.0;
  double L_ = 0.0;
};

/// T loss terms with standard-normal a_t, b_t.
inline std::vector<OppLossTerm> random_opp_losses(Eigen::Index d, long T, std::uint64_t seed, double ridge = 0.0) {
  CounterRng rng(seed, 0x0bb);
  std::vector<OppLossTerm> out(T);
  for (auto& l : out) {
    l.a = Vec(d);
    l.b = Vec(d);
    for (Eigen::Index i = 0; i < d; ++i) l.a(i) = rng.normal();
    for (Eigen::Index i = 0; i < d; ++i) l.b(i) = rng.normal();
    l.ridge = ridge;
  }
  return out;
}

}  // namespace oco
