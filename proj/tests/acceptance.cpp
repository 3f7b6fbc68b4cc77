// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include "oracles.hpp"

#include "oco/harness/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

using namespace oco;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& check) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("%s %d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmtd(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Verdict capacity() {
  const auto t0 = Clock::now();
  double worst_fin = 0.0, worst_disc = 0.0;
  for (int m = 1; m <= 32; ++m)
    for (double p : {1.0, 2.0}) {
      double s = 0.0;
      for (int k = 1; k <= m; ++k) s += std::pow(k, p);
      const double exact = std::pow(s, 1.0 / p);
      const double h = effective_memory_capacity(Dynamics::finite_memory(m, 1, p), p).H;
      worst_fin = std::max(worst_fin, std::abs(h - exact) / exact);
    }
  for (double rho : {0.3, 0.5, 0.9}) {
    const double exact = rho / ((1 - rho) * (1 - rho));
    const double h = effective_memory_capacity(Dynamics::discounted(rho, 1, 1.0), 1.0).H;
    worst_disc = std::max(worst_disc, std::abs(h - exact) / exact);
  }
  const double secs = seconds_since(t0);
  return {worst_fin <= 1e-12 && worst_disc <= 1e-9 && secs < 1.0,
          "finite rel err " + fmtd("%.2e", worst_fin) + ", discounted rel err " + fmtd("%.2e", worst_disc) +
              ", runtime " + fmtd("%.3f s", secs)};
}

Verdict stability() {
  CounterRng rng(1001);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index d = 1 + inst % 3;
    const long T = 150;
    const bool fin = inst % 2 == 0;
    const Dynamics dyn = fin ? Dynamics::finite_memory(1 + inst % 7, d) : Dynamics::discounted(0.3 + 0.013 * inst, d);
    const std::size_t blocks = fin ? static_cast<std::size_t>(dyn.m()) : 40;
    oracle::ScriptedEnv env(dyn, DecisionSpace::cube(d, 1.0), oracle::random_linear_losses(rng, T, blocks, d), 1.0);
    LearnerConfig cfg;
    cfg.eta = 0.01 + 0.2 * rng.uniform();
    const double alpha = 0.5 + rng.uniform();
    const RegretTrace tr = run_ftrl(env, T, SquaredNorm(alpha), cfg);
    if (!tr.ok()) return {false, "solver failure: " + *tr.error};
    const double bound = cfg.eta * lipschitz_circ_bound(1.0, dyn, 2.0) / alpha + 2 * cfg.inner_tol;
    for (long t = 1; t < T; ++t) {
      const double step = env.space().norm(tr.rounds[t].x - tr.rounds[t - 1].x);
      if (step > bound) ++violations;
      worst_ratio = std::max(worst_ratio, step / bound);
    }
  }
  return {violations == 0, std::to_string(violations) + " violations, max step/bound " + fmtd("%.4f", worst_ratio)};
}

Verdict regret_bound() {
  const auto t0 = Clock::now();
  CounterRng rng(1002);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int m = 1 + inst % 8;
    const Eigen::Index d = 1 + inst % 3;
    const long T = 64 + 448 * (inst % 5) / 4;
    const Dynamics dyn = Dynamics::finite_memory(m, d);
    oracle::ScriptedEnv env(dyn, DecisionSpace::cube(d, 1.0), oracle::random_linear_losses(rng, T, m, d), 1.0);
    const double alpha = 0.5 + rng.uniform();
    const SquaredNorm R(alpha);
    const double D = R.diameter(env.space());
    const double Lc = lipschitz_circ_bound(1.0, dyn, 2.0);
    const double H = effective_memory_capacity(dyn, 2.0).H;
    LearnerConfig cfg;
    cfg.eta = tune_step_size(D, alpha, 1.0, Lc, H, T) * std::exp(2.0 * rng.uniform() - 1.0);
    const RegretTrace tr = run_ftrl(env, T, R, cfg);
    if (!tr.ok()) return {false, "solver failure: " + *tr.error};
    const double bound = regret_bound_value(D, alpha, cfg.eta, T, 1.0, Lc, H) + T * cfg.inner_tol;
    if (tr.regret > bound) ++violations;
    worst_ratio = std::max(worst_ratio, tr.regret / bound);
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 120.0,
          std::to_string(violations) + " violations, max regret/bound " + fmtd("%.4f", worst_ratio)};
}

Verdict lower_bound() {
  const auto t0 = Clock::now();
  const long T = 4096, trials = 5000;
  std::vector<double> ms, regrets;
  bool a = true, b = true;
  std::string detail;
  for (int m : {1, 2, 4, 8}) {
    LowerBoundSpec spec;
    spec.m = m;
    spec.p = 2.0;
    spec.L = 1.0;
    spec.T = T;
    spec.trials = trials;
    spec.seed = 7;
    const LowerBoundResult r = empirical_lower_bound(tuned_ftrl_learner(), spec);
    if (r.failed > 0) return {false, std::to_string(r.failed) + " failed trials at m=" + std::to_string(m)};
    a = a && std::abs(r.mean_loss) <= 3.0 * r.loss_std_err;
    b = b && r.mean_regret >= 0.1 * m * std::sqrt(static_cast<double>(T));
    ms.push_back(m);
    regrets.push_back(r.mean_regret);
    detail += "m=" + std::to_string(m) + " regret " + fmtd("%.2f", r.mean_regret) + "+-" + fmtd("%.2f", r.std_err) +
              " loss " + fmtd("%.3f", r.mean_loss) + "+-" + fmtd("%.3f", r.loss_std_err) + "; ";
  }
  const double slope = loglog_slope(ms, regrets);
  const bool c = std::abs(slope - 1.0) <= 0.3;
  const double secs = seconds_since(t0);
  detail += std::to_string(trials) + " trials, slope " + fmtd("%.4f", slope) + " (a " + (a ? "ok" : "no") + ", b " +
            (b ? "ok" : "no") + ", c " + (c ? "ok" : "no") + ")";
  return {a && b && c && secs < 600.0, detail};
}

Verdict appendix_h() {
  using namespace oco::harness;
  const auto t0 = Clock::now();
  const json cfg = json::parse(R"({
    "experiment": "olc_constant", "T": 300, "trials": 20, "seed": 1,
    "learner": {"eta": "one_over_sqrt_T", "baselines": [1, 2, 4, 8, 16]},
    "environment": {"d": 2, "noise": 1.0, "cost": "state_sum"},
    "grid": {"rho": [0.9, 0.95], "alpha": [0, 0.15, 0.05]}
  })");
  const RunConfig rc = parse_run_config(cfg);
  std::map<std::string, std::map<std::string, double>> mean;
  for (const Panel& panel : rc.panels) {
    for (long trial = 0; trial < rc.trials; ++trial)
      for (const RegretTrace& tr : run_trial(rc, panel, trial).traces) {
        if (!tr.ok()) return {false, panel.name + ": " + *tr.error};
        mean[panel.name][tr.learner] += tr.regret / rc.trials;
      }
  }
  bool pass = true;
  std::string detail;
  for (const char* p : {"alpha0.15_rho0.9", "alpha0.05_rho0.95"}) {
    const auto& r = mean.at(p);
    for (int m : {1, 2, 4}) pass = pass && r.at("OCO-UM") <= r.at("OCO-FM-" + std::to_string(m));
    detail += std::string(p) + " UM " + fmtd("%.2f", r.at("OCO-UM")) + " FM1/2/4 " + fmtd("%.2f", r.at("OCO-FM-1")) +
              "/" + fmtd("%.2f", r.at("OCO-FM-2")) + "/" + fmtd("%.2f", r.at("OCO-FM-4")) + "; ";
  }
  const auto& z = mean.at("alpha0_rho0.95");
  const double rel = std::abs(z.at("OCO-UM") - z.at("OCO-FM-16")) / std::abs(z.at("OCO-FM-16"));
  pass = pass && rel <= 0.10;
  detail += "alpha0_rho0.95 UM " + fmtd("%.2f", z.at("OCO-UM")) + " FM16 " + fmtd("%.2f", z.at("OCO-FM-16"));
  const double secs = seconds_since(t0);
  return {pass && secs < 300.0, detail};
}

Verdict minibatch() {
  CounterRng rng(1006);
  int switch_violations = 0, bound_violations = 0, runs = 0;
  double worst_ratio = 0.0;
  for (int inst = 0; inst < 24; ++inst) {
    const int m = 1 + inst % 8;
    const Eigen::Index d = 1 + inst % 2;
    const long T = 100 + 37 * inst;
    const Dynamics dyn = Dynamics::finite_memory(m, d);
    oracle::ScriptedEnv env(dyn, DecisionSpace::cube(d, 1.0), oracle::random_linear_losses(rng, T, m, d), 1.0);
    const SquaredNorm R(1.0);
    const double D = R.diameter(env.space());
    const double Lc = lipschitz_circ_bound(1.0, dyn, 2.0);
    for (int S : {1, 2, 3, m, 2 * m + 1}) {
      LearnerConfig cfg;
      cfg.batch_size = S;
      cfg.eta = S == m ? finite_minibatch_step_size(D, 1.0, 1.0, Lc, T, m) : 0.05 + 0.1 * rng.uniform();
      const RegretTrace tr = run_minibatch_ftrl(env, T, R, cfg);
      if (!tr.ok()) return {false, "solver failure: " + *tr.error};
      ++runs;
      if (tr.switch_count > (T + S - 1) / S) ++switch_violations;
      if (S == m) {
        const double bound = finite_minibatch_regret_bound(D, 1.0, cfg.eta, T, 1.0, Lc, m) + T * cfg.inner_tol;
        if (tr.regret > bound) ++bound_violations;
        worst_ratio = std::max(worst_ratio, tr.regret / bound);
      }
    }
  }
  return {switch_violations == 0 && bound_violations == 0,
          std::to_string(runs) + " runs, " + std::to_string(switch_violations) + " switch violations, " +
              std::to_string(bound_violations) + " bound violations, max regret/bound " + fmtd("%.4f", worst_ratio)};
}

/// Central differences against circ_loss on one instance; returns the relative error.
double fd_check(const HistoryLoss& f, const Vec& x, long t, const Dynamics& dyn) {
  const Vec g = circ_loss(f, x, t, dyn).grad;
  const Vec fd = oracle::fd_gradient([&](const Vec& y) { return f.value(oracle::steady_history(dyn, y, t)); }, x);
  return (g - fd).norm() / std::max(fd.norm(), 1e-300);
}

Verdict gradients() {
  CounterRng rng(1007);
  std::map<std::string, double> worst;
  for (int inst = 0; inst < 100; ++inst) {
    const long t = 1 + inst % 30;
    {
      const Dynamics dyn = Dynamics::finite_memory(1 + inst % 6, 2);
      const LossPtr f = oracle::quadratic_loss(rng, dyn.m(), 2);
      worst["finite"] = std::max(worst["finite"], fd_check(*f, oracle::random_vec(rng, 2), t, dyn));
    }
    {
      const Dynamics dyn = Dynamics::discounted(0.2 + 0.007 * inst, 2);
      const LossPtr f = oracle::quadratic_loss(rng, 40, 2);
      worst["discounted"] = std::max(worst["discounted"], fd_check(*f, oracle::random_vec(rng, 2), t, dyn));
    }
    {
      OlcSystem sys;
      sys.F = oracle::random_contraction(rng, 2, 0.5 + 0.4 * rng.uniform());
      sys.G = oracle::random_mat(rng, 2, 2);
      sys.s0 = oracle::random_vec(rng, 2);
      sys.w = gaussian_disturbances(2, 30, 100 + inst);
      const Mat Q = oracle::random_mat(rng, 2, 2);
      const auto cost = std::make_shared<QuadraticCost>(Q * Q.transpose(), Mat::Zero(2, 2), oracle::random_vec(rng, 2),
                                                        Vec::Zero(2));
      const OlcConstantInputEnv env(sys, 30, cost);
      worst["olc_constant"] = std::max(worst["olc_constant"],
                                       fd_check(*env.loss(t), oracle::random_vec(rng, 2, 0.5), t, env.dynamics()));
    }
    {
      OlcSystem sys;
      sys.F = oracle::random_contraction(rng, 2, 0.5);
      sys.G = oracle::random_contraction(rng, 2, 0.9);
      sys.s0 = oracle::random_vec(rng, 2);
      sys.w = gaussian_disturbances(2, 30, 200 + inst);
      const Mat Q = oracle::random_mat(rng, 2, 2), Rm = oracle::random_mat(rng, 2, 2);
      const auto cost = std::make_shared<QuadraticCost>(Q * Q.transpose(), Rm * Rm.transpose(),
                                                        oracle::random_vec(rng, 2), oracle::random_vec(rng, 2));
      const OlcDacEnv env(sys, Mat::Zero(2, 2), 1.0, 0.5, 3, 30, cost);
      worst["olc_dac"] = std::max(worst["olc_dac"],
                                  fd_check(*env.loss(t), oracle::random_vec(rng, 12, 0.2), t, env.dynamics()));
    }
    {
      OppWorld w;
      w.rho = 0.2 + 0.007 * inst;
      w.F = oracle::random_mat(rng, 2, 2, 0.5);
      w.mu_xi = oracle::random_vec(rng, 2);
      w.mu1 = oracle::random_vec(rng, 2);
      const OppEnv env(w, random_opp_losses(2, 30, 300 + inst, 0.1 + rng.uniform()), DecisionSpace::ball(2, 1.0));
      worst["opp"] = std::max(worst["opp"], fd_check(*env.loss(t), oracle::random_vec(rng, 2), t, env.dynamics()));
    }
  }
  bool pass = true;
  std::string detail = "max rel err";
  for (const auto& [k, v] : worst) {
    pass = pass && v <= 1e-5;
    detail += " " + k + " " + fmtd("%.1e", v);
  }
  return {pass && worst.size() == 5, detail};
}

Verdict olc_closed_form() {
  CounterRng rng(1008);
  double dev_const = 0.0, dev_dac = 0.0;
  const long T = 50;
  for (int run = 0; run < 50; ++run) {
    const Eigen::Index d = 1 + run % 3;
    OlcSystem sys;
    sys.F = oracle::random_contraction(rng, d, 0.3 + 0.6 * rng.uniform());
    sys.G = oracle::random_contraction(rng, d, 0.5 + rng.uniform());
    sys.s0 = oracle::random_vec(rng, d);
    sys.w = gaussian_disturbances(d, T, 500 + run);
    sys.kappa = 2.0;
    {
      const OlcConstantInputEnv env(sys, T);
      std::vector<Vec> u;
      for (long t = 0; t < T; ++t) u.push_back(env.space().project(oracle::random_vec(rng, d)));
      const auto s = env.simulate(u);
      History h;
      for (long t = 1; t <= T; ++t) {
        h = history_update(h, u[t - 1], env.dynamics());
        dev_const = std::max(dev_const, (env.state_from_history(t, h) - s[t]).cwiseAbs().maxCoeff());
      }
    }
    {
      OlcSystem dsys = sys;
      dsys.F = oracle::random_contraction(rng, d, 0.5);
      const int hdac = 1 + run % 4;
      const OlcDacEnv env(dsys, Mat::Zero(d, d), 2.0, 0.5, hdac, T);
      std::vector<Vec> M;
      for (long t = 0; t < T; ++t) M.push_back(oracle::random_vec(rng, d * d * hdac, 0.3));
      const auto tr = env.simulate(M);
      History h;
      for (long t = 0; t < T; ++t) {
        h = history_update(h, M[t], env.dynamics());
        const auto [s, u] = env.state_control_from_history(t, h);
        dev_dac = std::max(dev_dac, (s - tr.s[t]).cwiseAbs().maxCoeff());
        dev_dac = std::max(dev_dac, (u - tr.u[t]).cwiseAbs().maxCoeff());
      }
    }
  }
  return {dev_const <= 1e-9 && dev_dac <= 1e-9,
          "max dev constant-input " + fmtd("%.2e", dev_const) + ", DAC " + fmtd("%.2e", dev_dac)};
}

Verdict prefix_sequence() {
  CounterRng rng(1009);
  std::vector<Dynamics> dyns{Dynamics::finite_memory(4, 2), Dynamics::discounted(0.8, 3),
                             Dynamics::olc_constant_input(oracle::random_contraction(rng, 3, 0.9), oracle::random_mat(rng, 3, 2)),
                             Dynamics::olc_dac(oracle::random_contraction(rng, 2, 0.5), oracle::random_mat(rng, 2, 2), 1.5, 0.5, 3)};
  double dev = 0.0;
  int count_errors = 0;
  for (const Dynamics& dyn : dyns) {
    const Vec x = oracle::random_vec(rng, dyn.decision_dim());
    PrefixSequence seq(x, dyn);
    for (long t = 1; t <= 50; ++t) {
      const History& phi = seq.next();
      dev = std::max(dev, max_abs_diff(phi, oracle::steady_history(dyn, x, t)));
      if (seq.a_applications() != static_cast<std::uint64_t>(t - 1)) ++count_errors;
    }
  }
  return {dev <= 1e-10 && count_errors == 0,
          "max dev " + fmtd("%.2e", dev) + ", " + std::to_string(count_errors) + " count mismatches"};
}

}  // namespace

int main() {
  report(1, "capacity oracle equivalence", capacity);
  report(2, "FTRL stability", stability);
  report(3, "regret bound", regret_bound);
  report(4, "lower-bound reproduction", lower_bound);
  report(5, "unbounded vs finite memory in linear control", appendix_h);
  report(6, "mini-batch switching", minibatch);
  report(7, "gradient correctness", gradients);
  report(8, "linear control closed form", olc_closed_form);
  report(9, "incremental prefix sequence", prefix_sequence);
  return failures == 0 ? 0 : 1;
}
