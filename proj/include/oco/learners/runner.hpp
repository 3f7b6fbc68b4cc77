#pragma once

#include "oco/core/circ.hpp"
#include "oco/core/environment.hpp"
#include "oco/learners/ftrl.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace oco {

/// How a learner sees the problem. By default it uses the environment's own
/// dynamics and losses; a model may substitute other dynamics and translate
/// each revealed f_t into that history space (e.g. a finite-memory view).
struct LearnerModel {
  std::string name = "OCO-UM";
  std::optional<Dynamics> dynamics;
  std::function<LossPtr(const LossPtr&)> wrap;
};

struct RunOptions {
  /// Evaluate f~_t(x_t) every round for non-affine losses (O(t) per round).
  bool record_circ = false;
};

struct RoundRecord {
  long t = 0;
  Vec x;
  double loss = 0.0;                                          // f_t(h_t)
  double circ = std::numeric_limits<double>::quiet_NaN();     // f~_t(x_t)
  bool switched = false;
};

struct RegretTrace {
  std::string learner;
  std::vector<RoundRecord> rounds;
  std::vector<double> benchmark_prefix;  // sum_{s<=t} f~_s(x*)
  Vec x_star;
  double benchmark_value = std::numeric_limits<double>::quiet_NaN();
  double total_loss = 0.0;
  double regret = std::numeric_limits<double>::quiet_NaN();
  long switch_count = 0;
  double max_step = 0.0;       // max ||x_{t+1} - x_t||
  double circ_lipschitz = 0.0; // measured Lipschitz constant of the learner's circ losses
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
  std::vector<double> cumulative_loss() const {
    std::vector<double> out;
    out.reserve(rounds.size());
    double s = 0.0;
    for (const auto& r : rounds) out.push_back(s += r.loss);
    return out;
  }
};

/// Plays a FTRL-family learner against env for T rounds and accounts
/// policy regret against the best fixed decision under the true dynamics.
inline RegretTrace run_learner(const Environment& env, long T, const SquaredNorm& R, const LearnerConfig& cfg,
                               const LearnerModel& model = {}, const RunOptions& opt = {}) {
  require(T >= 1 && T <= env.horizon(), "T must lie in [1, horizon]");
  const Dynamics& dyn = env.dynamics();
  const DecisionSpace& X = env.space();
  FtrlLearner learner(model.dynamics ? *model.dynamics : dyn, X, R, cfg);

  RegretTrace tr;
  tr.learner = model.name;
  tr.rounds.reserve(T);
  CircSum bench(dyn);
  std::vector<Vec> bench_coef(T);
  std::vector<double> bench_off(T, 0.0);

  History h;
  Vec prev;
  for (long t = 1; t <= T; ++t) {
    RoundRecord rec;
    rec.t = t;
    try {
      rec.x = learner.decide(t);
    } catch (const ConvergenceError& e) {
      tr.error = std::string(e.what()) + " at round " + std::to_string(t);
      break;
    }
    rec.switched = learner.switched();
    if (t > 1) tr.max_step = std::max(tr.max_step, X.norm(rec.x - prev));
    prev = rec.x;

    h = history_update(h, rec.x, dyn);
    const LossPtr f = env.loss(t);
    rec.loss = f->value(h);
    tr.total_loss += rec.loss;

    Vec c = bench.add(t, f);
    if (c.size() > 0) {
      bench_off[t - 1] = f->affine()->offset;
      rec.circ = bench_off[t - 1] + c.dot(rec.x);
      bench_coef[t - 1] = std::move(c);
    } else if (opt.record_circ) {
      rec.circ = circ_loss(*f, rec.x, t, dyn).value;
    }

    learner.observe(t, model.wrap ? model.wrap(f) : f);
    tr.rounds.push_back(std::move(rec));
  }
  tr.switch_count = learner.switches();
  tr.circ_lipschitz = learner.circ_lipschitz();
  if (tr.error) return tr;

  try {
    BenchmarkResult b = benchmark_solve(bench, X, cfg.solver());
    tr.x_star = b.x;
    tr.benchmark_value = b.value;
  } catch (const ConvergenceError& e) {
    tr.error = std::string("benchmark: ") + e.what();
    return tr;
  }
  tr.regret = tr.total_loss - tr.benchmark_value;

  // Per-round benchmark values at x*.
  tr.benchmark_prefix.reserve(T);
  std::optional<PrefixSequence> seq;
  if (!bench.is_affine()) seq.emplace(tr.x_star, dyn);
  double acc = 0.0;
  for (long t = 1; t <= T; ++t) {
    double v;
    if (bench_coef[t - 1].size() > 0) {
      v = bench_off[t - 1] + bench_coef[t - 1].dot(tr.x_star);
      if (seq) seq->next();
    } else {
      v = env.loss(t)->value(seq->next());
    }
    tr.benchmark_prefix.push_back(acc += v);
  }
  return tr;
}

inline RegretTrace run_ftrl(const Environment& env, long T, const SquaredNorm& R, const LearnerConfig& cfg,
                            const LearnerModel& model = {}, const RunOptions& opt = {}) {
  require(cfg.batch_size == 1, "run_ftrl expects batch size 1");
  return run_learner(env, T, R, cfg, model, opt);
}

inline RegretTrace run_minibatch_ftrl(const Environment& env, long T, const SquaredNorm& R, const LearnerConfig& cfg,
                                      const LearnerModel& model = {}, const RunOptions& opt = {}) {
  return run_learner(env, T, R, cfg, model, opt);
}

}  // namespace oco
