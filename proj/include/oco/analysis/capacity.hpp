#pragma once

#include "oco/core/circ.hpp"
#include "oco/core/dynamics.hpp"
#include "oco/core/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oco {

/// ||A^k|| on the history space. Exact for finite_memory (1 for k <= m),
/// discounted (rho^k) and olc_constant_input (||F^k||_2); for olc_dac the
/// order-level bound kappa^4 rho^(k/2) with unit constant.
inline double operator_norm_Ak(const Dynamics& dyn, long k) {
  require(k >= 0, "power k must be >= 0");
  if (k == 0) return 1.0;
  switch (dyn.kind()) {
    case DynamicsKind::finite_memory: return k <= dyn.m() ? 1.0 : 0.0;
    case DynamicsKind::discounted: return std::pow(dyn.rho(), static_cast<double>(k));
    case DynamicsKind::olc_dac: return std::pow(dyn.kappa(), 4) * std::pow(dyn.rho(), 0.5 * static_cast<double>(k));
    case DynamicsKind::olc_constant_input: {
      Mat P = Mat::Identity(dyn.F().rows(), dyn.F().cols());
      for (long i = 0; i < k; ++i) P = dyn.F() * P;
      return Eigen::JacobiSVD<Mat>(P).singularValues()(0);
    }
  }
  return 0.0;
}

/// Power iteration for ||A^k|| in the xi-weighted 2-norm, restricted to
/// histories with n_blocks input blocks (olc_constant_input: the state space).
inline double operator_norm_estimate(const Dynamics& dyn, long k, std::size_t n_blocks, int iters = 500,
                                     std::uint64_t seed = 1) {
  require(k >= 0 && n_blocks >= 1, "need k >= 0 and at least one block");
  const bool seq = dyn.is_sequence();
  const std::size_t nb = seq ? n_blocks : 1;
  const Eigen::Index bd = seq ? dyn.decision_dim() : dyn.state_dim();
  auto weight = [&](std::size_t blk) -> Vec {
    if (!seq) return Vec::Ones(bd);
    return (dyn.xi(blk) * dyn.metric().array().sqrt()).matrix();
  };
  // Work in scaled coordinates v = W y so the target is a plain 2-norm.
  auto apply = [&](const History& v, bool adjoint) {
    History y;
    for (std::size_t b = 0; b < v.size(); ++b) {
      const Vec w = weight(b);
      y.push_back(adjoint ? Vec(v[b].array() * w.array()) : Vec(v[b].array() / w.array()));
    }
    for (long i = 0; i < k; ++i) y = adjoint ? dyn.apply_A_adjoint(y) : dyn.apply_A(y);
    History out;
    for (std::size_t b = 0; b < y.size(); ++b) {
      const Vec w = weight(b);
      out.push_back(adjoint ? Vec(y[b].array() / w.array()) : Vec(y[b].array() * w.array()));
    }
    return out;
  };
  auto norm2 = [](const History& h) {
    double s = 0.0;
    for (const auto& b : h.blocks()) s += b.squaredNorm();
    return std::sqrt(s);
  };

  CounterRng rng(seed);
  History v;
  for (std::size_t b = 0; b < nb; ++b) {
    Vec blk(bd);
    for (Eigen::Index i = 0; i < bd; ++i) blk(i) = rng.normal();
    v.push_back(blk);
  }
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    v *= 1.0 / nv;
    History av = apply(v, false);
    sigma = norm2(av);
    if (sigma == 0.0) return 0.0;
    History w = apply(av, true);
    w.truncate(nb);
    v = w;
  }
  return sigma;
}

struct CapacityReport {
  double p = 1.0;
  double H = 0.0;
  long truncation_k = 0;
  double tail_bound = 0.0;
};

namespace detail {

/// ||A^k|| for k = 0, 1, 2, ... with running matrix powers.
class PowerNorms {
 public:
  explicit PowerNorms(const Dynamics& dyn) : dyn_(dyn) {
    if (dyn.kind() == DynamicsKind::olc_constant_input) P_ = Mat::Identity(dyn.F().rows(), dyn.F().cols());
  }
  double next() {
    const long k = k_++;
    if (dyn_.kind() != DynamicsKind::olc_constant_input) return operator_norm_Ak(dyn_, k);
    if (k > 0) P_ = dyn_.F() * P_;
    return k == 0 ? 1.0 : Eigen::JacobiSVD<Mat>(P_).singularValues()(0);
  }

 private:
  const Dynamics& dyn_;
  Mat P_;
  long k_ = 0;
};

/// ||A^k|| <= C beta^k for all k, with beta < 1.
struct GeometricDecay {
  double C;
  double beta;
};

inline GeometricDecay decay_certificate(const Dynamics& dyn) {
  switch (dyn.kind()) {
    case DynamicsKind::discounted: return {1.0, dyn.rho()};
    case DynamicsKind::olc_dac: return {std::pow(dyn.kappa(), 4), std::sqrt(dyn.rho())};
    case DynamicsKind::olc_constant_input: {
      // For any K0 with q = ||F^K0|| < 1: ||F^k|| <= (c_max / q) (q^(1/K0))^k,
      // c_max = max_{r<K0} ||F^r||. Pick the K0 that needs the fewest terms.
      const Mat& F = dyn.F();
      Mat P = Mat::Identity(F.rows(), F.cols());
      double c_max = 1.0;
      std::optional<GeometricDecay> best;
      double best_cost = std::numeric_limits<double>::infinity();
      for (int K0 = 1; K0 <= 2048; ++K0) {
        P = F * P;
        const double q = Eigen::JacobiSVD<Mat>(P).singularValues()(0);
        if (q == 0.0) return {c_max, 0.0};
        if (q < 1.0) {
          const GeometricDecay g{c_max / q, std::pow(q, 1.0 / K0)};
          const double cost = (std::log(g.C) + 60.0) / -std::log(g.beta);
          if (cost < best_cost) best_cost = cost, best = g;
          if (q < 1e-200) break;
        }
        c_max = std::max(c_max, q);
      }
      if (best) return *best;
      throw DivergenceError("||F^k|| does not decay; effective memory capacity is infinite");
    }
    case DynamicsKind::finite_memory: break;
  }
  return {1.0, 0.0};
}

/// Partial sums of sum_k k^(p*pw) ||A^k||^p (pw in {0, 1}) until the
/// geometric tail certificate drops below tol^p.
inline CapacityReport summed_series(const Dynamics& dyn, double p, double tol, bool polynomial) {
  require(p >= 1.0, "p must be >= 1");
  require(tol > 0.0, "tol must be > 0");
  const GeometricDecay dec = decay_certificate(dyn);
  const double target = std::pow(tol, p);
  const double q = std::pow(dec.beta, p);
  const double Cp = std::pow(dec.C, p);
  const auto kpow = [&](double k) { return polynomial ? std::pow(k, p) : 1.0; };

  PowerNorms norms(dyn);
  double sum = 0.0;
  double tail = std::numeric_limits<double>::infinity();
  long K = 0;
  const long kMax = 10'000'000;
  for (; K <= kMax; ++K) {
    const double a = norms.next();
    sum += (polynomial && K == 0) ? 0.0 : kpow(static_cast<double>(K)) * std::pow(a, p);
    // Terms beyond K decrease at least by ratio r once r < 1.
    const double k1 = static_cast<double>(K + 1);
    const double r = (polynomial ? std::pow((k1 + 1.0) / k1, p) : 1.0) * q;
    if (r < 1.0) {
      const double next = Cp * kpow(k1) * std::pow(q, k1);
      tail = next / (1.0 - r);
      if (tail < target) break;
    }
  }
  if (K > kMax) throw DivergenceError("memory series did not reach its tail tolerance");
  CapacityReport rep;
  rep.p = p;
  rep.truncation_k = K;
  rep.H = std::pow(sum, 1.0 / p);
  rep.tail_bound = std::pow(sum + tail, 1.0 / p) - rep.H;
  return rep;
}

}  // namespace detail

/// H_p = (sum_k k^p ||A^k||^p)^(1/p). Finite memory is summed exactly.
inline CapacityReport effective_memory_capacity(const Dynamics& dyn, double p, double tol = 1e-12) {
  require(p >= 1.0, "p must be >= 1");
  if (dyn.kind() == DynamicsKind::finite_memory) {
    double s = 0.0;
    for (int k = 1; k <= dyn.m(); ++k) s += std::pow(static_cast<double>(k), p);
    return {p, std::pow(s, 1.0 / p), dyn.m(), 0.0};
  }
  return detail::summed_series(dyn, p, tol, true);
}

/// Lipschitz constant of f~_t from that of f_t. Linear sequence dynamics:
/// L (sum_k ||A^k||^p)^(1/p) (finite memory: L m^(1/p), m live blocks);
/// olc_constant_input: L sum_k ||A^k||.
inline double lipschitz_circ_bound(double L, const Dynamics& dyn, double p, double tol = 1e-12) {
  require(L >= 0.0, "L must be >= 0");
  require(p >= 1.0, "p must be >= 1");
  if (L == 0.0) return 0.0;
  if (dyn.kind() == DynamicsKind::finite_memory) return L * std::pow(static_cast<double>(dyn.m()), 1.0 / p);
  const double pe = dyn.is_sequence() ? p : 1.0;
  const CapacityReport r = detail::summed_series(dyn, pe, tol, false);
  return L * r.H;
}

}  // namespace oco
