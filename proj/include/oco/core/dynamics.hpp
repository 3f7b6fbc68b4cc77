#pragma once

#include "oco/core/history.hpp"
#include "oco/core/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace oco {

enum class DynamicsKind { finite_memory, discounted, olc_constant_input, olc_dac };

inline const char* to_string(DynamicsKind k) {
  switch (k) {
    case DynamicsKind::finite_memory: return "finite_memory";
    case DynamicsKind::discounted: return "discounted";
    case DynamicsKind::olc_constant_input: return "olc_constant_input";
    case DynamicsKind::olc_dac: return "olc_dac";
  }
  return "?";
}

/// The operator pair (A, B) of h_t = A h_{t-1} + B x_t together with the
/// history-space norm (weights xi, exponent p, per-block decision norm).
///
/// Three kinds are linear sequence dynamics,
///   A(y_0, y_1, ...) = (0, A_0 y_0, A_1 y_1, ...),  B x = (x, 0, ...),
/// and differ only in the per-block maps A_k:
///   finite_memory(m):  A_k = I for k < m-1, A_{m-1} = 0 (exactly m blocks kept)
///   discounted(rho):   A_k = rho I
///   olc_dac:           A_0 = G., A_k = Ft. for k >= 1 (left-multiplication of
///                      every d x d sub-block of the truncated DAC parameter)
/// olc_constant_input keeps a single block in R^d with A = F and B = G / max(1, ||G||).
///
/// Infinite kinds drop trailing blocks whose weighted contribution falls
/// below 1e-12 of the history norm.
class Dynamics {
 public:
  static constexpr double kTailRelTol = 1e-12;

  static Dynamics finite_memory(int m, Eigen::Index dim, double p = 2.0) {
    require(m >= 1, "memory length m must be >= 1");
    Dynamics d(DynamicsKind::finite_memory, dim, p);
    d.m_ = m;
    return d;
  }

  static Dynamics discounted(double rho, Eigen::Index dim, double p = 2.0) {
    require(rho >= 0.0 && rho < 1.0, "discount rho must lie in [0, 1)");
    Dynamics d(DynamicsKind::discounted, dim, p);
    d.rho_ = rho;
    return d;
  }

  static Dynamics olc_constant_input(const Mat& F, const Mat& G) {
    require_shape(F.rows() == F.cols(), "F must be square");
    require_shape(G.rows() == F.rows(), "G must have as many rows as F");
    Dynamics d(DynamicsKind::olc_constant_input, G.cols(), 2.0);
    d.F_ = F;
    d.G_ = G;
    const double g = spectral_norm(G);
    d.gain_ = std::max(1.0, g);
    d.B_ = G / d.gain_;
    d.state_dim_ = F.rows();
    return d;
  }

  /// Ft = F - G K is the closed-loop matrix; decisions are h_trunc stacked
  /// d x d blocks M^[1..h_trunc].
  static Dynamics olc_dac(const Mat& Ft, const Mat& G, double kappa, double rho, int h_trunc) {
    require_shape(Ft.rows() == Ft.cols() && G.rows() == Ft.rows() && G.cols() == Ft.rows(),
                  "DAC dynamics need square F~ and G of equal size");
    require(kappa >= 1.0, "kappa must be >= 1");
    require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
    require(h_trunc >= 1, "h_trunc must be >= 1");
    const Eigen::Index d = Ft.rows();
    Dynamics dyn(DynamicsKind::olc_dac, d * d * h_trunc, 2.0);
    dyn.F_ = Ft;
    dyn.G_ = G;
    dyn.kappa_ = kappa;
    dyn.rho_ = rho;
    dyn.h_trunc_ = h_trunc;
    dyn.state_dim_ = d;
    for (int s = 1; s <= h_trunc; ++s) {
      dyn.metric_.segment((s - 1) * d * d, d * d).setConstant(std::pow(rho, -s));
    }
    return dyn;
  }

  /// Default truncation for the DAC parameter: smallest s with kappa^4 rho^s < 1e-8.
  static int default_h_trunc(double kappa, double rho) {
    require(kappa >= 1.0 && rho > 0.0 && rho < 1.0, "need kappa >= 1 and rho in (0,1)");
    return std::max(1, static_cast<int>(std::ceil(std::log(1e-8 / std::pow(kappa, 4)) / std::log(rho))));
  }

  /// Override the leading history weights; xi[0] must be 1.
  Dynamics with_xi(std::vector<double> xi) const {
    require(!xi.empty() && xi[0] == 1.0, "history weights need xi_0 = 1");
    for (double w : xi) require(w >= 0.0 && std::isfinite(w), "history weights must be finite and >= 0");
    Dynamics d = *this;
    d.xi_override_ = std::move(xi);
    return d;
  }

  Dynamics with_p(double p) const {
    require(p >= 1.0, "norm exponent p must be >= 1");
    Dynamics d = *this;
    d.p_ = p;
    return d;
  }

  DynamicsKind kind() const { return kind_; }
  bool is_sequence() const { return kind_ != DynamicsKind::olc_constant_input; }
  double p() const { return p_; }
  int m() const { return m_; }
  double rho() const { return rho_; }
  double kappa() const { return kappa_; }
  int h_trunc() const { return h_trunc_; }
  const Mat& F() const { return F_; }
  const Mat& G() const { return G_; }
  /// Factor removed from G to make ||B|| <= 1 (olc_constant_input only).
  double gain() const { return gain_; }
  Eigen::Index decision_dim() const { return dim_; }
  Eigen::Index state_dim() const { return state_dim_; }
  const Vec& metric() const { return metric_; }

  /// Largest number of blocks a history can hold, if bounded.
  std::optional<std::size_t> max_blocks() const {
    if (kind_ == DynamicsKind::finite_memory) return static_cast<std::size_t>(m_);
    if (kind_ == DynamicsKind::olc_constant_input) return 1;
    return std::nullopt;
  }

  double xi(std::size_t k) const {
    if (k < xi_override_.size()) return xi_override_[k];
    if (kind_ == DynamicsKind::olc_dac && k > 2) return std::pow(rho_, -0.5 * static_cast<double>(k - 2));
    return 1.0;
  }

  /// Decision-space norm of one history block.
  double block_norm(const Vec& v) const {
    if (kind_ == DynamicsKind::olc_constant_input) return v.norm();
    return std::sqrt((metric_.array() * v.array().square()).sum());
  }
  double dual_block_norm(const Vec& g) const {
    if (kind_ == DynamicsKind::olc_constant_input) return g.norm();
    return std::sqrt((g.array().square() / metric_.array()).sum());
  }

  /// Spectral radius of F below one (olc_constant_input); always true otherwise.
  bool stable() const {
    if (kind_ != DynamicsKind::olc_constant_input) return true;
    return F_.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
  }

  History apply_B(const Vec& x) const {
    require_shape(x.size() == dim_, "decision has dimension " + std::to_string(x.size()) + ", dynamics expect " +
                                        std::to_string(dim_));
    if (kind_ == DynamicsKind::olc_constant_input) return History::single(B_ * x);
    return History::single(x);
  }

  Vec apply_B_adjoint(const History& g) const {
    if (g.empty()) return Vec::Zero(dim_);
    if (kind_ == DynamicsKind::olc_constant_input) return B_.transpose() * g[0];
    return g[0];
  }

  History apply_A(const History& h) const {
    if (h.empty()) return h;
    check_blocks(h);
    if (kind_ == DynamicsKind::olc_constant_input) return History::single(F_ * h[0]);

    std::size_t n = h.size() + 1;
    if (kind_ == DynamicsKind::finite_memory) n = std::min<std::size_t>(n, m_);
    std::vector<Vec> out;
    out.reserve(n);
    out.push_back(Vec::Zero(dim_));
    for (std::size_t k = 1; k < n; ++k) out.push_back(block_map(k - 1, h[k - 1], false));
    History r(std::move(out));
    if (kind_ != DynamicsKind::finite_memory) trim_tail(r);
    return r;
  }

  /// Euclidean transpose: (A^T g)_k = A_k^T g_{k+1}. Shrinks the cotangent by one block.
  History apply_A_adjoint(const History& g) const {
    if (g.empty()) return g;
    check_blocks(g);
    if (kind_ == DynamicsKind::olc_constant_input) return History::single(F_.transpose() * g[0]);

    std::size_t n = g.size() - 1;
    if (kind_ == DynamicsKind::finite_memory) n = std::min<std::size_t>(n, m_ - 1);
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(block_map(k, g[k + 1], true));
    return History(std::move(out));
  }

  /// Drop trailing blocks that are zero or negligible relative to the norm.
  void trim_tail(History& h) const {
    if (h.empty()) return;
    std::vector<double> contrib(h.size());
    double total = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      contrib[k] = xi(k) * block_norm(h[k]);
      total += std::pow(contrib[k], p_);
    }
    total = std::pow(total, 1.0 / p_);
    std::size_t keep = h.size();
    while (keep > 0 && contrib[keep - 1] <= kTailRelTol * total) --keep;
    h.truncate(keep);
  }

 private:
  Dynamics(DynamicsKind kind, Eigen::Index dim, double p) : kind_(kind), dim_(dim), metric_(Vec::Ones(dim)) {
    require(dim >= 1, "decision dimension must be >= 1");
    require(p >= 1.0, "norm exponent p must be >= 1");
    p_ = p;
    state_dim_ = dim;
  }

  static double spectral_norm(const Mat& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(M).singularValues()(0);
  }

  void check_blocks(const History& h) const {
    const Eigen::Index expect = kind_ == DynamicsKind::olc_constant_input ? state_dim_ : dim_;
    for (const auto& b : h.blocks()) require_shape(b.size() == expect, "history block dimension mismatch");
    if (kind_ == DynamicsKind::olc_constant_input) require_shape(h.size() == 1, "olc_constant_input history has one block");
  }

  /// A_k y (or A_k^T y) for sequence kinds.
  Vec block_map(std::size_t k, const Vec& y, bool transpose) const {
    switch (kind_) {
      case DynamicsKind::finite_memory: return y;
      case DynamicsKind::discounted: return rho_ * y;
      case DynamicsKind::olc_dac: {
        const Eigen::Index d = state_dim_;
        const Mat& L = k == 0 ? G_ : F_;
        Vec out(y.size());
        Eigen::Map<const Mat> Y(y.data(), d, y.size() / d);
        Eigen::Map<Mat> O(out.data(), d, y.size() / d);
        if (transpose) O.noalias() = L.transpose() * Y;
        else O.noalias() = L * Y;
        return out;
      }
      case DynamicsKind::olc_constant_input: break;
    }
    return y;
  }

  DynamicsKind kind_;
  Eigen::Index dim_ = 0;
  Eigen::Index state_dim_ = 0;
  double p_ = 2.0;
  int m_ = 0;
  double rho_ = 0.0;
  double kappa_ = 1.0;
  int h_trunc_ = 0;
  double gain_ = 1.0;
  Mat F_, G_, B_;
  Vec metric_;
  std::vector<double> xi_override_;
};

}  // namespace oco
