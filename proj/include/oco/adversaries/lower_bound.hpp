#pragma once

#include "oco/adversaries/block_adversary.hpp"
#include "oco/analysis/capacity.hpp"
#include "oco/learners/runner.hpp"
#include "oco/learners/tuning.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

namespace oco {

using AdversaryLearner = std::function<RegretTrace(const AdversaryEnvironment&)>;

/// FTRL with R = x^2/2 on [-1, 1] and the tuned step size for the adversary's dynamics.
inline AdversaryLearner tuned_ftrl_learner(double inner_tol = 1e-8) {
  return [inner_tol](const AdversaryEnvironment& env) {
    const BlockAdversary& adv = env.adversary();
    const Dynamics& dyn = env.dynamics();
    const SquaredNorm R(1.0);
    const double D = R.diameter(env.space());
    const double Lc = lipschitz_circ_bound(adv.L, dyn, adv.p);
    const double H = effective_memory_capacity(dyn, adv.p).H;
    LearnerConfig cfg;
    cfg.eta = tune_step_size(D, R.alpha(), adv.L, Lc, H, adv.T);
    cfg.inner_tol = inner_tol;
    return run_ftrl(env, adv.T, R, cfg);
  };
}

struct LowerBoundResult {
  long trials = 0;
  long failed = 0;
  double mean_regret = 0.0;
  double std_err = 0.0;
  double mean_loss = 0.0;
  double loss_std_err = 0.0;
  std::vector<double> regrets;  // per trial, NaN for failed trials
  std::vector<double> losses;
};

struct LowerBoundSpec {
  AdversaryKind kind = AdversaryKind::finite;
  int m = 1;           // finite kind
  double rho = 0.5;    // discounted kind
  double p = 2.0;
  double L = 1.0;
  long T = 1;
  long trials = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency

  BlockAdversary adversary(long trial) const {
    const std::uint64_t s = trial_seed(seed, static_cast<std::uint64_t>(trial));
    return kind == AdversaryKind::finite ? BlockAdversary::finite(m, p, L, T, s)
                                         : BlockAdversary::discounted(rho, L, T, s);
  }
};

namespace detail {
inline void mean_se(const std::vector<double>& v, double& mean, double& se, long& n) {
  double s = 0.0;
  n = 0;
  for (double x : v)
    if (std::isfinite(x)) s += x, ++n;
  mean = n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
  double ss = 0.0;
  for (double x : v)
    if (std::isfinite(x)) ss += (x - mean) * (x - mean);
  se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
}
}  // namespace detail

/// Monte-Carlo policy regret of a learner against freshly signed
/// adversaries. Trial i uses seed ^ i; results are reduced in trial order,
/// so the output does not depend on the number of threads.
inline LowerBoundResult empirical_lower_bound(const AdversaryLearner& learner, const LowerBoundSpec& spec) {
  require(spec.trials >= 1, "trials must be >= 1");
  LowerBoundResult res;
  res.trials = spec.trials;
  res.regrets.assign(spec.trials, std::numeric_limits<double>::quiet_NaN());
  res.losses.assign(spec.trials, std::numeric_limits<double>::quiet_NaN());

  std::atomic<long> next{0};
  auto worker = [&] {
    for (long i = next++; i < spec.trials; i = next++) {
      const AdversaryEnvironment env(spec.adversary(i));
      const RegretTrace tr = learner(env);
      if (tr.ok()) {
        res.regrets[i] = tr.regret;
        res.losses[i] = tr.total_loss;
      }
    }
  };
  unsigned nt = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<long>(nt, spec.trials));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  long n = 0;
  detail::mean_se(res.regrets, res.mean_regret, res.std_err, n);
  res.failed = spec.trials - n;
  detail::mean_se(res.losses, res.mean_loss, res.loss_std_err, n);
  return res;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace oco
