#pragma once

#include "oco/adversaries/lower_bound.hpp"
#include "oco/analysis/bounds.hpp"
#include "oco/analysis/capacity.hpp"
#include "oco/environments/olc.hpp"
#include "oco/environments/opp.hpp"
#include "oco/environments/truncated_view.hpp"
#include "oco/harness/config.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace oco::harness {

enum class ExperimentKind { olc_constant, olc_dac, opp, adversary_finite, adversary_discounted };

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "olc_constant") return ExperimentKind::olc_constant;
  if (s == "olc_dac") return ExperimentKind::olc_dac;
  if (s == "opp") return ExperimentKind::opp;
  if (s == "adversary_finite") return ExperimentKind::adversary_finite;
  if (s == "adversary_discounted") return ExperimentKind::adversary_discounted;
  throw ConfigError("unknown experiment kind '" + s +
                    "' (expected olc_constant, olc_dac, opp, adversary_finite, adversary_discounted)");
}

inline std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::olc_constant: return "olc_constant";
    case ExperimentKind::olc_dac: return "olc_dac";
    case ExperimentKind::opp: return "opp";
    case ExperimentKind::adversary_finite: return "adversary_finite";
    case ExperimentKind::adversary_discounted: return "adversary_discounted";
  }
  return "unknown";
}

inline bool is_adversary(ExperimentKind k) {
  return k == ExperimentKind::adversary_finite || k == ExperimentKind::adversary_discounted;
}

struct LearnerSettings {
  std::string eta_mode = "tuned";  // "tuned", "one_over_sqrt_T" or "fixed"
  double eta = 0.0;
  long S = 1;
  double alpha = 1.0;
  double inner_tol = 1e-8;
  int inner_max_iters = 10000;
  std::vector<int> baselines;  // OCO-FM-m memories
};

inline LearnerSettings parse_learner(const json& j, ExperimentKind kind) {
  LearnerSettings s;
  if (j.contains("eta")) {
    const json& e = j.at("eta");
    if (e.is_number()) {
      s.eta_mode = "fixed";
      s.eta = e.get<double>();
      if (!(s.eta > 0.0)) throw ConfigError("learner.eta must be > 0");
    } else if (e.is_string() && (e == "tuned" || e == "one_over_sqrt_T")) {
      s.eta_mode = e.get<std::string>();
    } else {
      throw ConfigError("learner.eta must be a number, \"tuned\" or \"one_over_sqrt_T\"");
    }
  }
  s.S = get_or<long>(j, "S", 1);
  if (s.S < 1) throw ConfigError("learner.S must be >= 1");
  if (j.contains("regularizer")) {
    const json& r = j.at("regularizer");
    if (r.is_number()) {
      s.alpha = r.get<double>();
    } else if (r.is_object()) {
      const auto type = get_or<std::string>(r, "type", "squared_norm");
      if (type != "squared_norm") throw ConfigError("only the squared_norm regularizer is supported");
      s.alpha = get_or<double>(r, "alpha", 1.0);
    } else {
      throw ConfigError("learner.regularizer must be a number or an object");
    }
  }
  if (!(s.alpha > 0.0)) throw ConfigError("regularizer alpha must be > 0");
  s.inner_tol = get_or<double>(j, "inner_tol", 1e-8);
  s.inner_max_iters = get_or<int>(j, "inner_max_iters", 10000);
  if (!(s.inner_tol > 0.0) || s.inner_max_iters < 1) throw ConfigError("inner solver settings must be positive");
  const std::vector<int> fig = {1, 2, 4, 8, 16};
  s.baselines = get_or<std::vector<int>>(j, "baselines", kind == ExperimentKind::olc_constant ? fig : std::vector<int>{});
  for (int m : s.baselines)
    if (m < 1) throw ConfigError("learner.baselines entries must be >= 1");
  return s;
}

namespace detail {

inline Mat to_mat(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError("'" + key + "' must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (j[i].size() != static_cast<std::size_t>(cols)) throw ConfigError("'" + key + "' rows differ in length");
    for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
  }
  return M;
}

inline Vec to_vec(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline OlcSystem olc_system(const json& e, long T, std::uint64_t seed) {
  OlcSystem sys;
  if (e.contains("F")) {
    sys.F = to_mat(e.at("F"), "F");
  } else {
    const auto d = get_or<long>(e, "d", 2);
    if (d < 1) throw ConfigError("environment.d must be >= 1");
    sys.F = upper_triangular_system(d, get_or<double>(e, "rho", 0.9), get_or<double>(e, "alpha", 0.0));
  }
  const Eigen::Index d = sys.F.rows();
  sys.G = e.contains("G") ? to_mat(e.at("G"), "G") : Mat(Mat::Identity(d, d));
  sys.s0 = e.contains("s0") ? to_vec(e.at("s0"), "s0") : Vec(Vec::Zero(d));
  sys.w = gaussian_disturbances(d, T, seed, get_or<double>(e, "noise", 1.0));
  sys.kappa = get_or<double>(e, "kappa", 0.0);
  return sys;
}

inline StageCostPtr stage_cost(const json& e, Eigen::Index ds, Eigen::Index du) {
  if (!e.contains("cost") || e.at("cost") == "state_sum") return LinearCost::state_sum(ds);
  const json& c = e.at("cost");
  if (!c.is_object())
    throw ConfigError("environment.cost must be \"state_sum\" or {\"a\", \"b\", \"Q\", \"R\", \"L0\"}");
  const Vec a = c.contains("a") ? to_vec(c.at("a"), "cost.a") : Vec(Vec::Zero(ds));
  const Vec b = c.contains("b") ? to_vec(c.at("b"), "cost.b") : Vec(Vec::Zero(du));
  if (a.size() != ds || b.size() != du) throw ConfigError("cost vectors do not match the system dimensions");
  if (!c.contains("Q") && !c.contains("R")) return std::make_shared<LinearCost>(a, b);
  const Mat Q = c.contains("Q") ? to_mat(c.at("Q"), "cost.Q") : Mat(Mat::Zero(ds, ds));
  const Mat R = c.contains("R") ? to_mat(c.at("R"), "cost.R") : Mat(Mat::Zero(du, du));
  if (Q.rows() != ds || Q.cols() != ds || R.rows() != du || R.cols() != du)
    throw ConfigError("cost matrices do not match the system dimensions");
  const double L0 = get_or<double>(c, "L0", std::numeric_limits<double>::infinity());
  return std::make_shared<QuadraticCost>(Q, R, a, b, L0);
}

}  // namespace detail

inline LowerBoundSpec adversary_spec(ExperimentKind kind, const json& e, long T, std::uint64_t seed) {
  LowerBoundSpec spec;
  spec.kind = kind == ExperimentKind::adversary_finite ? AdversaryKind::finite : AdversaryKind::discounted;
  spec.m = get_or<int>(e, "m", 1);
  spec.rho = get_or<double>(e, "rho", 0.5);
  spec.p = get_or<double>(e, "p", 2.0);
  spec.L = get_or<double>(e, "L", 1.0);
  spec.T = T;
  spec.seed = seed;
  return spec;
}

/// Environment for one trial; all randomness comes from trial_seed(seed, trial).
inline std::unique_ptr<Environment> make_environment(ExperimentKind kind, const json& e, long T, std::uint64_t seed,
                                                     long trial) {
  const std::uint64_t s = trial_seed(seed, static_cast<std::uint64_t>(trial));
  switch (kind) {
    case ExperimentKind::olc_constant: {
      OlcSystem sys = detail::olc_system(e, T, s);
      auto cost = detail::stage_cost(e, sys.d(), sys.G.cols());
      return std::make_unique<OlcConstantInputEnv>(std::move(sys), T, cost);
    }
    case ExperimentKind::olc_dac: {
      OlcSystem sys = detail::olc_system(e, T, s);
      const Eigen::Index d = sys.d();
      const Mat K = e.contains("K") ? detail::to_mat(e.at("K"), "K") : Mat(Mat::Zero(d, d));
      const double kappa = get_or<double>(e, "kappa", 1.0);
      const double rho = get_or<double>(e, "stability_rho", get_or<double>(e, "rho", 0.9));
      auto cost = detail::stage_cost(e, d, d);
      return std::make_unique<OlcDacEnv>(std::move(sys), K, kappa, rho, get_or<int>(e, "h_trunc", 0), T, cost);
    }
    case ExperimentKind::opp: {
      const auto d = get_or<long>(e, "d", 2);
      if (d < 1) throw ConfigError("environment.d must be >= 1");
      OppWorld w;
      w.rho = get_or<double>(e, "rho", 0.5);
      w.F = e.contains("F") ? detail::to_mat(e.at("F"), "F") : Mat(get_or<double>(e, "F_scale", 1.0) * Mat::Identity(d, d));
      w.mu_xi = e.contains("mu_xi") ? detail::to_vec(e.at("mu_xi"), "mu_xi") : Vec(Vec::Zero(w.F.rows()));
      w.mu1 = e.contains("mu1") ? detail::to_vec(e.at("mu1"), "mu1") : Vec(Vec::Zero(w.F.rows()));
      auto losses = random_opp_losses(w.F.rows(), T, s, get_or<double>(e, "ridge", 0.0));
      return std::make_unique<OppEnv>(std::move(w), std::move(losses),
                                      DecisionSpace::ball(d, get_or<double>(e, "radius", 1.0)));
    }
    case ExperimentKind::adversary_finite:
    case ExperimentKind::adversary_discounted:
      return std::make_unique<AdversaryEnvironment>(adversary_spec(kind, e, T, seed).adversary(trial));
  }
  throw ConfigError("unknown experiment kind");
}

/// The history norm exponent used by the bounds: p of a sequence history,
/// 1 for the state-space history of constant-input control.
inline double native_p(const Dynamics& dyn) { return dyn.is_sequence() ? dyn.p() : 1.0; }

/// Constants feeding step-size tuning and the three-term regret bound.
struct Constants {
  double p = 1.0;
  std::optional<double> H1, H2, Hp, L_circ;
  double L = 0.0;
  double D = 0.0;
  std::string divergence;
};

inline Constants constants_for(const Dynamics& dyn, double L, double D) {
  Constants c;
  c.p = native_p(dyn);
  c.L = L;
  c.D = D;
  auto capacity = [&](double p) -> std::optional<double> {
    try {
      return effective_memory_capacity(dyn, p).H;
    } catch (const DivergenceError& e) {
      c.divergence = e.what();
      return std::nullopt;
    }
  };
  c.H1 = capacity(1.0);
  c.H2 = capacity(2.0);
  c.Hp = c.p == 1.0 ? c.H1 : c.p == 2.0 ? c.H2 : capacity(c.p);
  try {
    c.L_circ = lipschitz_circ_bound(L, dyn, c.p);
  } catch (const DivergenceError& e) {
    c.divergence = e.what();
  }
  return c;
}

inline std::optional<double> tuned_eta(const Constants& c, double alpha, long T, long S) {
  if (!c.Hp || !c.L_circ || c.L <= 0.0 || *c.L_circ <= 0.0 || c.D <= 0.0) return std::nullopt;
  return tune_step_size(c.D, alpha, c.L, *c.L_circ, *c.Hp, T, S);
}

/// Step size actually used by the learners.
inline double resolve_eta(const LearnerSettings& s, const Constants& c, long T) {
  if (s.eta_mode == "fixed") return s.eta;
  if (s.eta_mode == "one_over_sqrt_T") return one_over_sqrt_T(T);
  auto eta = tuned_eta(c, s.alpha, T, s.S);
  if (!eta) throw DivergenceError("cannot tune eta: " + (c.divergence.empty() ? "degenerate constants" : c.divergence));
  return *eta;
}

inline Constants environment_constants(const Environment& env, double alpha) {
  return constants_for(env.dynamics(), env.lipschitz(), SquaredNorm(alpha).diameter(env.space()));
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json constants_json(const Constants& c, const LearnerSettings& s, long T) {
  json j;
  j["p"] = c.p;
  j["H_1"] = opt_json(c.H1);
  j["H_2"] = opt_json(c.H2);
  j["H_p"] = opt_json(c.Hp);
  j["L"] = c.L;
  j["L_circ"] = opt_json(c.L_circ);
  j["D"] = c.D;
  j["alpha"] = s.alpha;
  j["S"] = s.S;
  j["T"] = T;
  const auto tuned = tuned_eta(c, s.alpha, T, s.S);
  j["eta_tuned"] = opt_json(tuned);
  std::optional<double> eta;
  if (s.eta_mode == "fixed") eta = s.eta;
  else if (s.eta_mode == "one_over_sqrt_T") eta = one_over_sqrt_T(T);
  else eta = tuned;
  j["eta_mode"] = s.eta_mode;
  j["eta"] = opt_json(eta);
  if (eta && c.Hp && c.L_circ)
    j["regret_bound"] = minibatch_regret_bound(c.D, s.alpha, *eta, T, c.L, *c.L_circ, *c.Hp, s.S);
  else
    j["regret_bound"] = nullptr;
  j["divergence"] = c.divergence.empty() ? json(nullptr) : json(c.divergence);
  return j;
}

/// Analysis report for an experiment panel, computed on the trial-0 environment.
inline json analysis_json(ExperimentKind kind, const Environment& env, const json& e, const LearnerSettings& s,
                          long T) {
  const Constants c = environment_constants(env, s.alpha);
  json j = constants_json(c, s, T);
  j["experiment"] = kind_name(kind);
  auto bundle = [&](auto&& make) {
    try {
      j["constants"] = make().to_json();
    } catch (const std::exception& ex) {
      j["constants"] = nullptr;
      j["constants_error"] = ex.what();
    }
  };
  if (kind == ExperimentKind::olc_constant || kind == ExperimentKind::olc_dac) {
    double W = 1.0;
    double d = 1.0;
    double kappa = 1.0, rho = 0.5, L0 = 0.0;
    if (auto* o = dynamic_cast<const OlcConstantInputEnv*>(&env)) {
      const OlcSystem& sys = o->system();
      for (long t = 0; t < T; ++t) W = std::max(W, sys.w[t].norm());
      d = static_cast<double>(sys.d());
      kappa = sys.declared_kappa();
      rho = Eigen::EigenSolver<Mat>(sys.F).eigenvalues().cwiseAbs().maxCoeff();
      L0 = env.lipschitz() / env.dynamics().gain();
    } else if (auto* o = dynamic_cast<const OlcDacEnv*>(&env)) {
      const OlcSystem& sys = o->system();
      for (long t = 0; t < T; ++t) W = std::max(W, sys.w[t].norm());
      d = static_cast<double>(sys.d());
      kappa = env.dynamics().kappa();
      rho = env.dynamics().rho();
      L0 = env.lipschitz();
    }
    j["W"] = W;
    bundle([&] { return olc_constants(kappa, rho, d, W, L0, T); });
  } else if (kind == ExperimentKind::opp) {
    const auto& o = dynamic_cast<const OppEnv&>(env);
    double L0 = 0.0;
    for (const auto& l : o.losses()) L0 = std::max({L0, l.b.norm(), l.a.norm()});
    const double DX = 2.0 * get_or<double>(e, "radius", 1.0);
    bundle([&] { return opp_constants(o.world().rho, L0, o.normF(), DX, T); });
  }
  return j;
}

/// Dynamics-only analysis: {"kind": "finite", "m", "p"}, {"kind": "discounted", "rho", "p"},
/// {"kind": "olc", "kappa", "rho", "d", "W", "L0"} or {"kind": "opp", "rho", "L0", "normF", "D_X"}.
inline json analyze_dynamics(const json& dcfg, const LearnerSettings& s, long T) {
  const auto kind = get_required<std::string>(dcfg, "kind");
  const double L = get_or<double>(dcfg, "L", 1.0);
  const double D = get_or<double>(dcfg, "D", 0.5 * s.alpha);
  json j;
  if (kind == "finite") {
    const int m = get_required<int>(dcfg, "m");
    if (m < 1) throw ConfigError("dynamics.m must be >= 1");
    j = constants_json(constants_for(Dynamics::finite_memory(m, 1, get_or<double>(dcfg, "p", 2.0)), L, D), s, T);
  } else if (kind == "discounted") {
    const double rho = get_required<double>(dcfg, "rho");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("dynamics.rho must lie in (0, 1)");
    j = constants_json(constants_for(Dynamics::discounted(rho, 1, get_or<double>(dcfg, "p", 2.0)), L, D), s, T);
  } else if (kind == "olc") {
    const double kappa = get_required<double>(dcfg, "kappa");
    const double rho = get_required<double>(dcfg, "rho");
    const double d = get_or<double>(dcfg, "d", 1.0);
    const double W = get_or<double>(dcfg, "W", 1.0);
    const double L0 = get_or<double>(dcfg, "L0", 1.0);
    if (!(kappa >= 1.0 && rho > 0.0 && rho < 1.0 && d >= 1.0)) throw ConfigError("olc dynamics need kappa >= 1, rho in (0, 1), d >= 1");
    const ConstantsBundle b = olc_constants(kappa, rho, d, W, L0, T);
    const auto di = static_cast<Eigen::Index>(d);
    const Dynamics dyn = Dynamics::olc_dac(rho * Mat::Identity(di, di), Mat::Identity(di, di), kappa, rho,
                                           Dynamics::default_h_trunc(kappa, rho));
    Constants c = constants_for(dyn, b.at("L"), b.at("D"));
    c.L_circ = b.at("L_circ");
    j = constants_json(c, s, T);
    j["constants"] = b.to_json();
  } else if (kind == "opp") {
    const double rho = get_required<double>(dcfg, "rho");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("dynamics.rho must lie in (0, 1)");
    const ConstantsBundle b = opp_constants(rho, get_or<double>(dcfg, "L0", 1.0), get_or<double>(dcfg, "normF", 1.0),
                                            get_or<double>(dcfg, "D_X", 2.0), T);
    Constants c = constants_for(Dynamics::discounted(rho, 1, 1.0), b.at("L"), b.at("D"));
    c.L_circ = b.at("L_circ");
    j = constants_json(c, s, T);
    j["constants"] = b.to_json();
  } else {
    throw ConfigError("unknown dynamics kind '" + kind + "' (expected finite, discounted, olc, opp)");
  }
  j["dynamics"] = dcfg;
  return j;
}

/// The learners of one trial: OCO-UM followed by OCO-FM-m baselines.
inline std::vector<LearnerModel> learner_models(const Environment& env, const LearnerSettings& s) {
  std::vector<LearnerModel> out(1);
  for (int m : s.baselines) out.push_back(truncated_memory_model(env.dynamics(), m));
  return out;
}

}  // namespace oco::harness
