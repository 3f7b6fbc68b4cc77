#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace oco;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

OlcSystem random_system(CounterRng& rng, Eigen::Index d, long T, double fnorm, double gnorm, double kappa = 1.0) {
  OlcSystem sys;
  sys.F = oracle::random_contraction(rng, d, fnorm);
  sys.G = oracle::random_contraction(rng, d, gnorm);
  sys.s0 = oracle::random_vec(rng, d);
  for (long t = 0; t < T; ++t) sys.w.push_back(oracle::random_vec(rng, d, 0.5));
  sys.kappa = kappa;
  return sys;
}

/// s_t = F^t s_0 + sum_{k<t} F^{t-1-k} (G u_k + w_k).
Vec olc_state_formula(const OlcSystem& sys, const std::vector<Vec>& u, long t) {
  Vec s = oracle::mat_pow(sys.F, t) * sys.s0;
  for (long k = 0; k < t; ++k) s += oracle::mat_pow(sys.F, t - 1 - k) * (sys.G * u[k] + sys.w[k]);
  return s;
}

/// DAC rollout written out from the control law.
std::pair<std::vector<Vec>, std::vector<Vec>> dac_rollout(const OlcSystem& sys, const Mat& K, int h,
                                                          const std::vector<Vec>& M, long T) {
  const Eigen::Index d = sys.F.rows();
  auto w = [&](long i) -> Vec { return i >= 0 ? sys.w[i] : i == -1 ? sys.s0 : Vec(Vec::Zero(d)); };
  std::vector<Vec> s{sys.s0}, u;
  for (long t = 0; t < T; ++t) {
    Vec ut = -K * s.back();
    for (int j = 1; j <= h; ++j) ut += Eigen::Map<const Mat>(M[t].data() + (j - 1) * d * d, d, d) * w(t - j);
    s.push_back(sys.F * s.back() + sys.G * ut + sys.w[t]);
    u.push_back(ut);
  }
  return {s, u};
}

}  // namespace

TEST(OlcConstantInput, OneStepExample) {
  OlcSystem sys;
  sys.F = 0.5 * Mat::Identity(2, 2);
  sys.G = Mat::Identity(2, 2);
  sys.s0 = Vec::Zero(2);
  sys.w = {v2(0, 1), v2(0, 0)};
  const OlcConstantInputEnv env(sys, 2);
  const auto s = env.simulate({v2(1, 0), v2(1, 0)});
  EXPECT_EQ(s[1], v2(1, 1));
  EXPECT_EQ(s[2], v2(1.5, 0.5));
  // Round 1 plays u_0 and pays sum(s_1).
  const History h = history_update(History{}, v2(1, 0), env.dynamics());
  EXPECT_NEAR(env.loss(1)->value(h), 2.0, 1e-15);
}

TEST(OlcConstantInput, HistoryRecoversSimulatedStates) {
  CounterRng rng(41);
  for (int run = 0; run < 20; ++run) {
    const long T = 30;
    const OlcSystem sys = random_system(rng, 3, T, 0.9, 1.5, 0.0);
    const OlcConstantInputEnv env(sys, T);
    std::vector<Vec> u;
    for (long t = 0; t < T; ++t) u.push_back(env.space().project(oracle::random_vec(rng, 3)));
    const auto s = env.simulate(u);
    History h;
    for (long t = 1; t <= T; ++t) {
      h = history_update(h, u[t - 1], env.dynamics());
      EXPECT_LE((s[t] - olc_state_formula(sys, u, t)).norm(), 1e-9);
      EXPECT_LE((env.state_from_history(t, h) - s[t]).norm(), 1e-9);
      EXPECT_NEAR(env.loss(t)->value(h), s[t].sum(), 1e-9);
    }
  }
}

TEST(OlcConstantInput, ZeroDisturbanceScalesHistory) {
  CounterRng rng(42);
  OlcSystem sys = random_system(rng, 2, 10, 0.7, 2.0, 0.0);
  sys.s0.setZero();
  for (auto& w : sys.w) w.setZero();
  const OlcConstantInputEnv env(sys, 10);
  const Vec x = v2(0.6, -0.3);
  const auto s = env.simulate(std::vector<Vec>(10, x));
  const double g = env.dynamics().gain();
  EXPECT_NEAR(g, 2.0, 1e-12);
  for (long t = 1; t <= 10; ++t)
    EXPECT_LE((s[t] - g * oracle::steady_history(env.dynamics(), x, t)[0]).norm(), 1e-12);
}

TEST(OlcConstantInput, QuadraticCostGradient) {
  CounterRng rng(43);
  const OlcSystem sys = random_system(rng, 2, 8, 0.8, 1.0);
  const Mat Q = Mat::Identity(2, 2) * 2.0;
  const auto cost = std::make_shared<QuadraticCost>(Q, Mat::Zero(2, 2), v2(0.1, -0.2), Vec::Zero(2), 10.0);
  const OlcConstantInputEnv env(sys, 8, cost);
  for (long t = 1; t <= 8; ++t) {
    const Vec x = oracle::random_vec(rng, 2, 0.4);
    const LossPtr f = env.loss(t);
    const Vec g = circ_loss(*f, x, t, env.dynamics()).grad;
    const Vec fd = oracle::fd_gradient([&](const Vec& y) { return f->value(oracle::steady_history(env.dynamics(), y, t)); }, x);
    EXPECT_LE((g - fd).norm(), 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST(OlcConstantInput, RejectsControlCostAndBadShapes) {
  CounterRng rng(44);
  const OlcSystem sys = random_system(rng, 2, 5, 0.5, 0.5);
  EXPECT_THROW(OlcConstantInputEnv(sys, 5, std::make_shared<LinearCost>(Vec::Ones(2), Vec::Ones(2))), UnsupportedLoss);
  OlcSystem short_w = sys;
  short_w.w.resize(3);
  EXPECT_THROW(OlcConstantInputEnv(short_w, 5), ShapeError);
  OlcSystem big = sys;
  big.kappa = 0.1;
  EXPECT_THROW(OlcConstantInputEnv(big, 5), InvalidParameter);
}

TEST(OlcDac, SimulatorMatchesRolloutAndHistory) {
  CounterRng rng(45);
  for (int run = 0; run < 10; ++run) {
    const long T = 25;
    const Eigen::Index d = 2;
    const int h = 3;
    const OlcSystem sys = random_system(rng, d, T, 0.5, 0.9);
    const Mat K = Mat::Zero(d, d);
    const OlcDacEnv env(sys, K, 1.0, 0.5, h, T);
    std::vector<Vec> M;
    for (long t = 0; t < T; ++t) M.push_back(oracle::random_vec(rng, d * d * h, 0.2));
    const auto [s, u] = dac_rollout(sys, K, h, M, T);
    const auto tr = env.simulate(M);
    History hist;
    for (long t = 0; t < T; ++t) {
      EXPECT_LE((tr.s[t] - s[t]).norm(), 1e-12);
      EXPECT_LE((tr.u[t] - u[t]).norm(), 1e-12);
      EXPECT_LE((env.closed_form_state(t, M) - s[t]).norm(), 1e-9);
      hist = history_update(hist, M[t], env.dynamics());
      const auto [sh, uh] = env.state_control_from_history(t, hist);
      EXPECT_LE((sh - s[t]).norm(), 1e-9) << "t=" << t;
      EXPECT_LE((uh - u[t]).norm(), 1e-9) << "t=" << t;
      EXPECT_NEAR(env.loss(t + 1)->value(hist), s[t].sum(), 1e-9);
    }
  }
}

TEST(OlcDac, StabilizingGainAndQuadraticCost) {
  CounterRng rng(46);
  const long T = 12;
  OlcSystem sys = random_system(rng, 2, T, 0.5, 0.5);
  sys.F = (Mat(2, 2) << 1.1, 0.0, 0.0, 0.4).finished();
  sys.G = Mat::Identity(2, 2);
  const Mat K = (Mat(2, 2) << 0.8, 0.0, 0.0, 0.0).finished();
  const auto cost = std::make_shared<QuadraticCost>(Mat::Identity(2, 2), 0.5 * Mat::Identity(2, 2), Vec::Zero(2),
                                                    Vec::Zero(2), 50.0);
  const OlcDacEnv env(sys, K, 2.0, 0.5, 2, T, cost);
  std::vector<Vec> M;
  for (long t = 0; t < T; ++t) M.push_back(oracle::random_vec(rng, 8, 0.1));
  const auto [s, u] = dac_rollout(sys, K, 2, M, T);
  History hist;
  for (long t = 0; t < T; ++t) {
    hist = history_update(hist, M[t], env.dynamics());
    EXPECT_NEAR(env.loss(t + 1)->value(hist), 0.5 * s[t].squaredNorm() + 0.25 * u[t].squaredNorm(), 1e-9);
  }
  const Vec x = oracle::random_vec(rng, 8, 0.1);
  const LossPtr f = env.loss(6);
  const Vec g = circ_loss(*f, x, 6, env.dynamics()).grad;
  const Vec fd = oracle::fd_gradient([&](const Vec& y) { return f->value(oracle::steady_history(env.dynamics(), y, 6)); }, x);
  EXPECT_LE((g - fd).norm(), 1e-6 * std::max(1.0, fd.norm()));
}

TEST(OlcDac, ZeroDisturbanceAndStateIsInert) {
  CounterRng rng(47);
  OlcSystem sys = random_system(rng, 2, 6, 0.5, 0.9);
  sys.s0.setZero();
  for (auto& w : sys.w) w.setZero();
  const OlcDacEnv env(sys, Mat::Zero(2, 2), 1.0, 0.5, 2, 6);
  std::vector<Vec> M(6, oracle::random_vec(rng, 8));
  for (const Vec& s : env.simulate(M).s) EXPECT_EQ(s.norm(), 0.0);
}

TEST(OlcDac, RejectsUnstableGain) {
  CounterRng rng(48);
  OlcSystem sys = random_system(rng, 2, 6, 0.5, 0.9);
  sys.F = 1.2 * Mat::Identity(2, 2);
  EXPECT_THROW(OlcDacEnv(sys, Mat::Zero(2, 2), 2.0, 0.5, 2, 6), InvalidParameter);
}

TEST(Disturbances, CsvRoundTrip) {
  const auto w = gaussian_disturbances(3, 5, 9);
  std::stringstream ss;
  write_disturbances_csv(ss, w);
  const auto r = read_disturbances_csv(ss);
  ASSERT_EQ(r.size(), w.size());
  for (std::size_t t = 0; t < w.size(); ++t) EXPECT_EQ(r[t], w[t]);
  std::stringstream bad("x,y\n0,1\n");
  EXPECT_THROW(read_disturbances_csv(bad), ShapeError);
}

TEST(UpperTriangular, Layout) {
  const Mat F = upper_triangular_system(3, 0.9, 0.15);
  EXPECT_EQ(F(0, 0), 0.9);
  EXPECT_EQ(F(0, 2), 0.15);
  EXPECT_EQ(F(2, 0), 0.0);
}

namespace {

OppWorld small_world() {
  OppWorld w;
  w.rho = 0.5;
  w.F = Mat::Identity(2, 2);
  w.mu_xi = v2(1, 0);
  w.mu1 = Vec::Zero(2);
  return w;
}

}  // namespace

TEST(Opp, MeanRecursionExample) {
  const OppWorld w = small_world();
  EXPECT_EQ(w.next_mean(w.mu1, Vec::Zero(2)), v2(0.5, 0));
  const OppEnv env(w, random_opp_losses(2, 5, 1), DecisionSpace::ball(2, 1.0));
  EXPECT_LE((env.mean(2, oracle::steady_history(env.dynamics(), Vec::Zero(2), 2)) - v2(0.5, 0)).norm(), 1e-15);
}

TEST(Opp, MeanConvergesToFixedPoint) {
  OppWorld w = small_world();
  w.F = (Mat(2, 2) << 0.5, 0.2, -0.1, 0.3).finished();
  const Vec x = v2(0.4, -0.7);
  Vec mu = w.mu1;
  for (int t = 0; t < 200; ++t) mu = w.next_mean(mu, x);
  EXPECT_LE((mu - (w.mu_xi + w.F * x)).norm(), 1e-12);
}

TEST(Opp, FrameworkLossesMatchDirectRecursion) {
  CounterRng rng(49);
  for (double ridge : {0.0, 0.3}) {
    OppWorld w = small_world();
    w.rho = 0.7;
    w.F = oracle::random_mat(rng, 2, 2, 0.5);
    w.mu1 = oracle::random_vec(rng, 2);
    const long T = 40;
    const OppEnv env(w, random_opp_losses(2, T, 3, ridge), DecisionSpace::ball(2, 1.0));
    std::vector<Vec> xs;
    History h;
    double framework = 0.0;
    for (long t = 1; t <= T; ++t) {
      xs.push_back(env.space().project(oracle::random_vec(rng, 2)));
      h = history_update(h, xs.back(), env.dynamics());
      framework += env.loss(t)->value(h);
    }
    EXPECT_NEAR(framework, env.direct_loss(xs), 1e-9);
    // A fixed decision's direct loss equals the summed circ losses.
    const Vec x = v2(0.3, 0.1);
    double circ = 0.0;
    for (long t = 1; t <= T; ++t) circ += circ_loss(*env.loss(t), x, t, env.dynamics()).value;
    EXPECT_NEAR(circ, env.direct_loss(std::vector<Vec>(T, x)), 1e-9);
  }
}

TEST(Opp, LossesAreLipschitzInTheOneNormHistory) {
  CounterRng rng(50);
  OppWorld w = small_world();
  w.F = oracle::random_mat(rng, 2, 2);
  const OppEnv env(w, random_opp_losses(2, 10, 4), DecisionSpace::ball(2, 1.0));
  for (long t = 1; t <= 10; ++t)
    EXPECT_LE(dual_weighted_norm(env.loss(t)->affine()->coef, env.dynamics()), env.lipschitz() * (1 + 1e-12));
}

TEST(Opp, RejectsCurvedLosses) {
  auto losses = random_opp_losses(2, 3, 1);
  losses[1].z_curvature = 0.5;
  EXPECT_THROW(OppEnv(small_world(), losses, DecisionSpace::ball(2, 1.0)), UnsupportedLoss);
  OppWorld bad = small_world();
  bad.rho = 1.0;
  EXPECT_THROW(OppEnv(bad, random_opp_losses(2, 3, 1), DecisionSpace::ball(2, 1.0)), InvalidParameter);
}

TEST(TruncatedView, LiftsTheLastMDecisions) {
  CounterRng rng(51);
  const Dynamics truth = Dynamics::discounted(0.6, 2);
  const int m = 3;
  const LossPtr f = oracle::quadratic_loss(rng, 5, 2);
  const LossPtr fm = truncate_memory(f, truth, m);
  History y = oracle::random_history(rng, m, 2);
  std::vector<Vec> lifted;
  for (int k = 0; k < m; ++k) lifted.push_back(std::pow(0.6, k) * y[k]);
  EXPECT_NEAR(fm->value(y), f->value(History(lifted)), 1e-14);
  // Gradient against finite differences on each block.
  const History g = fm->gradient(y);
  for (int k = 0; k < m; ++k) {
    const Vec fd = oracle::fd_gradient(
        [&](const Vec& yk) {
          History z = y;
          z[k] = yk;
          return fm->value(z);
        },
        y[k]);
    EXPECT_LE((g[k] - fd).norm(), 1e-6);
  }
  // Affine losses keep their closed form.
  const History c = oracle::random_history(rng, 5, 2);
  const LossPtr am = truncate_memory(make_affine_loss(c, 0.2, 1.0), truth, m);
  std::vector<Vec> lc;
  for (int k = 0; k < m; ++k) lc.push_back(c[k] * std::pow(0.6, k));
  EXPECT_NEAR(am->value(y), 0.2 + oracle::pair(History(lc), y), 1e-14);
}

TEST(TruncatedView, LongMemoryMatchesTheTruth) {
  CounterRng rng(52);
  const Dynamics truth = Dynamics::finite_memory(3, 1);
  oracle::ScriptedEnv env(truth, DecisionSpace::interval(-1, 1), oracle::random_linear_losses(rng, 40, 3, 1), 1.0);
  LearnerConfig cfg;
  cfg.eta = 0.1;
  const RegretTrace a = run_ftrl(env, 40, SquaredNorm(1.0), cfg);
  const RegretTrace b = run_ftrl(env, 40, SquaredNorm(1.0), cfg, truncated_memory_model(truth, 3));
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(b.learner, "OCO-FM-3");
  for (long t = 0; t < 40; ++t) EXPECT_NEAR(a.rounds[t].x(0), b.rounds[t].x(0), 1e-14);
  EXPECT_NEAR(a.regret, b.regret, 1e-12);
}
