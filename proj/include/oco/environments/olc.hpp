#pragma once

#include "oco/core/circ.hpp"
#include "oco/core/decision_space.hpp"
#include "oco/core/environment.hpp"
#include "oco/core/rng.hpp"
#include "oco/environments/stage_cost.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace oco {

/// s_{t+1} = F s_t + G u_t + w_t with a frozen disturbance sequence w_0, w_1, ...
struct OlcSystem {
  Mat F;
  Mat G;
  Vec s0;
  std::vector<Vec> w;
  double kappa = 0.0;  // declared bound on ||F||, ||G||; <= 0 derives max(1, ||F||, ||G||)

  Eigen::Index d() const { return F.rows(); }

  void validate(long T) const {
    require_shape(F.rows() == F.cols(), "F must be square");
    require_shape(G.rows() == F.rows(), "G must have as many rows as F");
    require_shape(s0.size() == F.rows(), "s0 must match the state dimension");
    require_shape(static_cast<long>(w.size()) >= T, "need at least T disturbances");
    for (const auto& wt : w) require_shape(wt.size() == F.rows(), "disturbance dimension mismatch");
    const double k = declared_kappa();
    require(spectral(F) <= k * (1.0 + 1e-9) && spectral(G) <= k * (1.0 + 1e-9), "||F||_2 and ||G||_2 must be <= kappa");
  }

  double declared_kappa() const {
    if (kappa > 0.0) return kappa;
    return std::max({1.0, spectral(F), spectral(G)});
  }

  static double spectral(const Mat& M) { return M.size() == 0 ? 0.0 : Eigen::JacobiSVD<Mat>(M).singularValues()(0); }
};

/// F with rho on the diagonal and alpha strictly above it.
inline Mat upper_triangular_system(Eigen::Index d, double rho, double alpha) {
  Mat F = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) F(i, j) = i == j ? rho : alpha;
  return F;
}

/// T standard-normal disturbance vectors from a counter-based stream.
inline std::vector<Vec> gaussian_disturbances(Eigen::Index d, long T, std::uint64_t seed, double scale = 1.0) {
  CounterRng rng(seed, 0xd157);
  std::vector<Vec> w(T, Vec(d));
  for (auto& wt : w)
    for (Eigen::Index i = 0; i < d; ++i) wt(i) = scale * rng.normal();
  return w;
}

/// CSV "t,w_1,...,w_d", one row per round starting at t = 0.
inline void write_disturbances_csv(std::ostream& os, const std::vector<Vec>& w) {
  const Eigen::Index d = w.empty() ? 0 : w[0].size();
  os << 't';
  for (Eigen::Index i = 1; i <= d; ++i) os << ",w_" << i;
  os << '\n';
  os.precision(17);
  for (std::size_t t = 0; t < w.size(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << w[t](i);
    os << '\n';
  }
}

inline std::vector<Vec> read_disturbances_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ShapeError("empty disturbance file");
  const auto d = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  require_shape(d >= 1 && line.rfind("t,", 0) == 0, "disturbance header must be t,w_1,...,w_d");
  std::vector<Vec> w;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    require_shape(std::stol(cell) == static_cast<long>(w.size()), "disturbance rows must be ordered t = 0, 1, ...");
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      require_shape(static_cast<bool>(std::getline(ss, cell, ',')), "disturbance row too short");
      v(i) = std::stod(cell);
    }
    w.push_back(std::move(v));
  }
  return w;
}

/// Constant-input control: decisions x_t = u_{t-1} in the unit ball, round t
/// pays c(s_t). History h_t = sum_{k<t} F^k B x_{t-k} with B = G / max(1, ||G||),
/// so s_t = max(1, ||G||) h_t + e_t with free response e_t = F e_{t-1} + w_{t-1}, e_0 = s_0.
class OlcConstantInputEnv final : public Environment {
 public:
  OlcConstantInputEnv(OlcSystem sys, long T, StageCostPtr cost = nullptr)
      : sys_(std::move(sys)), T_(T), dyn_(Dynamics::olc_constant_input(sys_.F, sys_.G)),
        X_(DecisionSpace::ball(sys_.G.cols(), 1.0)), cost_(cost ? std::move(cost) : LinearCost::state_sum(sys_.d())) {
    require(T >= 1, "horizon must be >= 1");
    sys_.validate(T);
    if (auto lin = cost_->linear()) {
      if (!lin->second.isZero(0.0)) throw UnsupportedLoss("constant-input control costs depend on the state only");
    }
    if (!dyn_.stable()) warnings_.push_back("spectral radius of F >= 1: effective memory capacity may be huge");
    e_.reserve(T + 1);
    e_.push_back(sys_.s0);
    for (long t = 0; t < T; ++t) e_.push_back(sys_.F * e_.back() + sys_.w[t]);
  }

  const Dynamics& dynamics() const override { return dyn_; }
  const DecisionSpace& space() const override { return X_; }
  long horizon() const override { return T_; }
  std::string name() const override { return "olc_constant"; }
  double lipschitz() const override { return dyn_.gain() * cost_->lipschitz(); }

  LossPtr loss(long t) const override {
    require(t >= 1 && t <= T_, "round out of range");
    const double g = dyn_.gain();
    const Vec& e = e_[t];
    const Vec u0 = Vec::Zero(sys_.G.cols());
    if (auto lin = cost_->linear()) {
      const Vec& a = lin->first;
      return make_affine_loss(History::single(g * a), a.dot(e), g * a.norm());
    }
    const StageCostPtr c = cost_;
    auto state = [g, e](const History& h) { return h.empty() ? e : Vec(g * h[0] + e); };
    return std::make_shared<FunctionLoss>(
        [c, state, u0](const History& h) { return c->value(state(h), u0); },
        [c, state, u0, g](const History& h) {
          Vec gs, gu;
          c->gradient(state(h), u0, gs, gu);
          return History::single(g * gs);
        },
        lipschitz());
  }

  /// States s_0 .. s_T of the recursion under controls u_0 .. u_{T-1}.
  std::vector<Vec> simulate(const std::vector<Vec>& u) const {
    require_shape(static_cast<long>(u.size()) >= T_, "need T controls");
    std::vector<Vec> s{sys_.s0};
    for (long t = 0; t < T_; ++t) s.push_back(sys_.F * s.back() + sys_.G * u[t] + sys_.w[t]);
    return s;
  }

  Vec state_from_history(long t, const History& h) const {
    require(t >= 0 && t <= T_, "round out of range");
    return h.empty() ? e_[t] : Vec(dyn_.gain() * h[0] + e_[t]);
  }
  const Vec& free_response(long t) const { return e_.at(t); }
  const OlcSystem& system() const { return sys_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  OlcSystem sys_;
  long T_;
  Dynamics dyn_;
  DecisionSpace X_;
  StageCostPtr cost_;
  std::vector<Vec> e_;
  std::vector<std::string> warnings_;
};

/// Disturbance-action control u_t = -K s_t + sum_s M_t^[s] w_{t-s} with
/// w_{-1} = s_0. Framework round tau = t + 1 plays x_tau = M_t (h_trunc
/// stacked d x d blocks) and pays c(s_t, u_t). With Ft = F - G K,
///   s_t = e_t + sum_{j>=1} sum_s Y_j^[s] w_{t-j-s},   u_t = -K s_t + sum_s Y_0^[s] w_{t-s},
/// where Y_0 = M_t, Y_j = Ft^{j-1} G M_{t-j} are the history blocks and
/// e_t = Ft^t s_0 + sum_{k<t} Ft^{t-1-k} w_k is the free response.
class OlcDacEnv final : public Environment {
 public:
  OlcDacEnv(OlcSystem sys, Mat K, double kappa, double rho, int h_trunc, long T, StageCostPtr cost = nullptr)
      : sys_(std::move(sys)), K_(std::move(K)), T_(T),
        dyn_(Dynamics::olc_dac(sys_.F - sys_.G * K_, sys_.G, kappa, rho,
                               h_trunc > 0 ? h_trunc : Dynamics::default_h_trunc(kappa, rho))),
        cost_(cost ? std::move(cost) : LinearCost::state_sum(sys_.d())) {
    require(T >= 1, "horizon must be >= 1");
    sys_.kappa = kappa;
    sys_.validate(T);
    const Eigen::Index d = sys_.d();
    require_shape(sys_.G.cols() == d && K_.rows() == d && K_.cols() == d, "DAC needs square G and K");
    require(OlcSystem::spectral(K_) <= kappa * (1.0 + 1e-9), "||K||_2 must be <= kappa");
    const Mat& Ft = dyn_.F();
    Mat P = Mat::Identity(d, d);
    for (int k = 1; k <= dyn_.h_trunc(); ++k) {
      P = Ft * P;
      if (OlcSystem::spectral(P) > kappa * kappa * std::pow(rho, k) + 1e-9)
        throw InvalidParameter("K is not (kappa, rho) strongly stable: ||(F-GK)^k|| > kappa^2 rho^k at k = " +
                               std::to_string(k));
    }
    Vec bound(dyn_.h_trunc());
    for (int s = 1; s <= dyn_.h_trunc(); ++s) bound(s - 1) = std::pow(kappa, 4) * std::pow(rho, s);
    X_ = DecisionSpace(dyn_.metric(), sets::SpectralBlocks{static_cast<int>(d), bound});

    e_.push_back(sys_.s0);
    for (long t = 0; t < T; ++t) e_.push_back(Ft * e_.back() + sys_.w[t]);
  }

  const Dynamics& dynamics() const override { return dyn_; }
  const DecisionSpace& space() const override { return X_; }
  long horizon() const override { return T_; }
  std::string name() const override { return "olc_dac"; }
  double lipschitz() const override { return cost_->lipschitz(); }

  /// w_i for i >= 0, s_0 for i = -1, zero before.
  Vec w(long i) const {
    if (i >= 0) return sys_.w.at(i);
    if (i == -1) return sys_.s0;
    return Vec::Zero(sys_.d());
  }

  /// sum_s Y^[s] w_{base - s}.
  Vec features(const Vec& Y, long base) const {
    const Eigen::Index d = sys_.d();
    Vec out = Vec::Zero(d);
    for (int s = 1; s <= dyn_.h_trunc(); ++s) {
      if (base - s < -1) break;
      Eigen::Map<const Mat> Ys(Y.data() + (s - 1) * d * d, d, d);
      out.noalias() += Ys * w(base - s);
    }
    return out;
  }

  /// (s_t, u_t) reconstructed from the history of framework round t + 1.
  std::pair<Vec, Vec> state_control_from_history(long t, const History& h) const {
    require(t >= 0 && t < T_, "time out of range");
    Vec s = e_[t];
    for (std::size_t j = 1; j < h.size() && static_cast<long>(j) <= t; ++j) s += features(h[j], t - j);
    Vec u = -K_ * s;
    if (!h.empty()) u += features(h[0], t);
    return {s, u};
  }

  LossPtr loss(long tau) const override {
    require(tau >= 1 && tau <= T_, "round out of range");
    const long t = tau - 1;
    if (auto lin = cost_->linear()) {
      History coef = cotangent(t, lin->first, lin->second);
      const double offset = lin->first.dot(e_[t]) - lin->second.dot(K_ * e_[t]);
      const double L = dual_weighted_norm(coef, dyn_);
      return make_affine_loss(std::move(coef), offset, L);
    }
    const OlcDacEnv* self = this;
    const StageCostPtr c = cost_;
    return std::make_shared<FunctionLoss>(
        [self, c, t](const History& h) {
          auto [s, u] = self->state_control_from_history(t, h);
          return c->value(s, u);
        },
        [self, c, t](const History& h) {
          auto [s, u] = self->state_control_from_history(t, h);
          Vec gs, gu;
          c->gradient(s, u, gs, gu);
          return self->cotangent(t, gs, gu);
        },
        lipschitz());
  }

  struct Trajectory {
    std::vector<Vec> s;  // s_0 .. s_T
    std::vector<Vec> u;  // u_0 .. u_{T-1}
  };

  /// Direct recursion under DAC parameters M_0 .. M_{T-1}.
  Trajectory simulate(const std::vector<Vec>& M) const {
    require_shape(static_cast<long>(M.size()) >= T_, "need T DAC parameters");
    Trajectory tr;
    tr.s.push_back(sys_.s0);
    for (long t = 0; t < T_; ++t) {
      const Vec& s = tr.s.back();
      Vec u = -K_ * s + features(M[t], t);
      tr.s.push_back(sys_.F * s + sys_.G * u + sys_.w[t]);
      tr.u.push_back(std::move(u));
    }
    return tr;
  }

  /// s_t = e_t + sum_{k<t} Ft^{t-1-k} G sum_s M_k^[s] w_{k-s}.
  Vec closed_form_state(long t, const std::vector<Vec>& M) const {
    Vec s = e_.at(t);
    Vec acc = Vec::Zero(sys_.d());
    for (long k = 0; k < t; ++k) acc = dyn_.F() * acc + sys_.G * features(M[k], k);
    return s + acc;
  }

  const Mat& K() const { return K_; }
  const Mat& Ftilde() const { return dyn_.F(); }
  const OlcSystem& system() const { return sys_; }

 private:
  /// Cotangent of h -> c(s(h), u(h)) given (dc/ds, dc/du).
  History cotangent(long t, const Vec& gs, const Vec& gu) const {
    const Eigen::Index d = sys_.d();
    const int H = dyn_.h_trunc();
    const Vec gs_total = gs - K_.transpose() * gu;
    std::vector<Vec> blocks;
    for (long j = 0; j <= t; ++j) {
      const Vec& g = j == 0 ? gu : gs_total;
      Vec blk = Vec::Zero(d * d * H);
      for (int s = 1; s <= H; ++s) {
        const long idx = t - j - s;
        if (idx < -1) break;
        Eigen::Map<Mat> B(blk.data() + (s - 1) * d * d, d, d);
        B.noalias() = g * w(idx).transpose();
      }
      blocks.push_back(std::move(blk));
    }
    return History(std::move(blocks));
  }

  OlcSystem sys_;
  Mat K_;
  long T_;
  Dynamics dyn_;
  DecisionSpace X_;
  StageCostPtr cost_;
  std::vector<Vec> e_;
};

}  // namespace oco
