#pragma once

#include "oco/harness/build.hpp"
#include "oco/harness/io.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <thread>

namespace oco::harness {

struct Panel {
  std::string name;  // empty for a single-panel run
  json environment;
  json grid_values = json::object();
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::olc_constant;
  long T = 1;
  long trials = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  unsigned threads = 0;
  bool write_traces = true;
  LearnerSettings learner;
  std::vector<Panel> panels;
};

namespace detail {

inline std::string label(const json& v) {
  if (v.is_number()) return fmt::format("{}", v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Cartesian product of grid lists, last key varying fastest.
inline std::vector<Panel> expand_grid(const json& env, const json& grid) {
  if (grid.empty()) return {Panel{"", env}};
  std::vector<Panel> out{Panel{"", env}};
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty()) throw ConfigError("grid." + key + " must be a non-empty array");
    std::vector<Panel> next;
    for (const Panel& p : out)
      for (const json& v : values) {
        Panel q = p;
        q.environment[key] = v;
        q.grid_values[key] = v;
        q.name += (q.name.empty() ? "" : "_") + key + label(v);
        next.push_back(std::move(q));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

/// Validates a run config; OCO_OUT_DIR, when set, replaces the output directory.
inline RunConfig parse_run_config(const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig rc;
  rc.kind = parse_kind(get_required<std::string>(cfg, "experiment"));
  rc.T = get_required<long>(cfg, "T");
  if (rc.T < 1) throw ConfigError("T must be >= 1");
  rc.trials = get_or<long>(cfg, "trials", 1);
  if (rc.trials < 1) throw ConfigError("trials must be >= 1");
  rc.seed = get_or<std::uint64_t>(cfg, "seed", 0);
  rc.out_dir = get_or<std::string>(cfg, "output_dir", "out");
  if (const char* env = std::getenv("OCO_OUT_DIR"); env && *env) rc.out_dir = env;
  rc.threads = get_or<unsigned>(cfg, "threads", 0);
  rc.write_traces = get_or<bool>(section(cfg, "output"), "traces", !is_adversary(rc.kind));
  rc.learner = parse_learner(section(cfg, "learner"), rc.kind);
  rc.panels = detail::expand_grid(section(cfg, "environment"), section(cfg, "grid"));
  return rc;
}

struct TrialOutcome {
  std::vector<RegretTrace> traces;
};

/// Plays every learner of one trial. Failures are recorded in the traces.
inline TrialOutcome run_trial(const RunConfig& rc, const Panel& panel, long trial) {
  TrialOutcome out;
  std::unique_ptr<Environment> env;
  std::vector<LearnerModel> models;
  LearnerConfig cfg;
  std::string setup_error;
  try {
    env = make_environment(rc.kind, panel.environment, rc.T, rc.seed, trial);
    models = learner_models(*env, rc.learner);
    cfg.eta = resolve_eta(rc.learner, environment_constants(*env, rc.learner.alpha), rc.T);
    cfg.batch_size = static_cast<int>(rc.learner.S);
    cfg.inner_tol = rc.learner.inner_tol;
    cfg.inner_max_iters = rc.learner.inner_max_iters;
    cfg.validate();
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  if (!setup_error.empty()) {
    RegretTrace tr;
    tr.learner = "OCO-UM";
    tr.error = setup_error;
    out.traces.push_back(std::move(tr));
    return out;
  }
  const SquaredNorm R(rc.learner.alpha);
  for (const LearnerModel& model : models) {
    try {
      out.traces.push_back(run_learner(*env, rc.T, R, cfg, model));
    } catch (const std::exception& e) {
      RegretTrace tr;
      tr.learner = model.name;
      tr.error = e.what();
      out.traces.push_back(std::move(tr));
    }
  }
  return out;
}

/// Runs work(i) for i < n on a worker pool in chunks and hands results to
/// collect(i, result) in index order from the calling thread.
template <class Work, class Collect>
void ordered_parallel(long n, unsigned threads, Work&& work, Collect&& collect) {
  unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::max<long>(1, std::min<long>(nt, n)));
  const long chunk = static_cast<long>(nt) * 4;
  using Result = decltype(work(0L));
  for (long base = 0; base < n; base += chunk) {
    const long len = std::min(chunk, n - base);
    std::vector<std::optional<Result>> slots(len);
    if (nt == 1) {
      for (long i = 0; i < len; ++i) slots[i].emplace(work(base + i));
    } else {
      std::atomic<long> next{0};
      std::vector<std::thread> pool;
      for (unsigned k = 0; k < nt; ++k)
        pool.emplace_back([&] {
          for (long i = next++; i < len; i = next++) slots[i].emplace(work(base + i));
        });
      for (auto& th : pool) th.join();
    }
    for (long i = 0; i < len; ++i) collect(base + i, std::move(*slots[i]));
  }
}

struct LearnerSummary {
  std::string learner;
  long ok = 0;
  long failed = 0;
  double mean_final_regret = 0.0;
  double se_final_regret = 0.0;
};

struct PanelResult {
  std::string name;
  json grid_values;
  std::vector<LearnerSummary> learners;
};

struct RunResult {
  int exit_code = 0;
  std::vector<PanelResult> panels;
  std::vector<std::filesystem::path> files;
};

namespace detail {

inline std::string suffixed(const std::string& stem, const std::string& panel, const std::string& ext) {
  return panel.empty() ? stem + ext : stem + "_" + panel + ext;
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

/// Mean final regret per panel and the log-log slope against the
/// adversary's block length.
inline json slope_report(const RunConfig& rc, const std::vector<PanelResult>& panels) {
  json rows = json::array();
  std::vector<double> xs, ys;
  for (const PanelResult& p : panels) {
    const LowerBoundSpec spec = adversary_spec(rc.kind, rc.panels[&p - panels.data()].environment, rc.T, rc.seed);
    const int m = spec.kind == AdversaryKind::finite ? spec.m : spec.adversary(0).m;
    for (const LearnerSummary& l : p.learners) {
      if (l.learner != "OCO-UM") continue;
      rows.push_back({{"panel", p.name}, {"m", m}, {"mean_regret", l.mean_final_regret},
                      {"std_err", l.se_final_regret}, {"trials", l.ok}, {"failed", l.failed},
                      {"reference_0.1_m_sqrtT", 0.1 * m * std::sqrt(static_cast<double>(rc.T))}});
      if (l.ok > 0 && l.mean_final_regret > 0.0) {
        xs.push_back(m);
        ys.push_back(l.mean_final_regret);
      }
    }
  }
  json j;
  j["experiment"] = kind_name(rc.kind);
  j["T"] = rc.T;
  j["rows"] = rows;
  bool distinct = xs.size() >= 2;
  for (std::size_t i = 1; i < xs.size(); ++i) distinct = distinct && xs[i] != xs[0];
  j["loglog_slope"] = distinct ? json(loglog_slope(xs, ys)) : json(nullptr);
  return j;
}

}  // namespace detail

/// Executes every panel and trial and writes traces, summaries, analysis
/// reports and the error log under rc.out_dir.
inline RunResult run_experiment(const RunConfig& rc) {
  namespace fs = std::filesystem;
  const fs::path root(rc.out_dir);
  fs::create_directories(root);
  RunResult res;
  long successes = 0;

  const fs::path err_path = root / "errors.csv";
  std::ofstream errors = open_out(err_path);
  errors << "panel,trial,learner,message\n";
  res.files.push_back(err_path);

  for (const Panel& panel : rc.panels) {
    // Analysis and config validation on the trial-0 environment.
    std::unique_ptr<Environment> env0;
    try {
      env0 = make_environment(rc.kind, panel.environment, rc.T, rc.seed, 0);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid environment") + (panel.name.empty() ? "" : " (" + panel.name + ")") +
                        ": " + e.what());
    }
    json analysis = analysis_json(rc.kind, *env0, panel.environment, rc.learner, rc.T);
    analysis["panel"] = panel.name;
    analysis["trials"] = rc.trials;
    analysis["seed"] = rc.seed;
    analysis["environment"] = panel.environment;
    const fs::path an_path = root / detail::suffixed("analysis", panel.name, ".json");
    open_out(an_path) << analysis.dump(2) << '\n';
    res.files.push_back(an_path);

    std::vector<std::string> order;
    std::map<std::string, SummaryAccumulator> acc;
    std::map<std::string, long> failed;
    for (const auto& m : learner_models(*env0, rc.learner)) {
      order.push_back(m.name);
      acc[m.name];
      failed[m.name] = 0;
    }
    env0.reset();

    const fs::path trace_dir = root / (panel.name.empty() ? std::string("traces") : "traces_" + panel.name);
    ordered_parallel(
        rc.trials, rc.threads, [&](long trial) { return run_trial(rc, panel, trial); },
        [&](long trial, TrialOutcome out) {
          for (const RegretTrace& tr : out.traces) {
            if (!tr.ok()) {
              errors << detail::csv_quote(panel.name) << ',' << trial << ',' << tr.learner << ','
                     << detail::csv_quote(*tr.error) << '\n';
              if (failed.count(tr.learner)) ++failed[tr.learner];
              continue;
            }
            ++successes;
            acc[tr.learner].add(tr);
            if (rc.write_traces) {
              const fs::path p = trace_dir / fmt::format("trial{:04d}_{}.csv", trial, tr.learner);
              auto os = open_out(p);
              write_trace_csv(os, tr, trial);
              res.files.push_back(p);
            }
          }
        });

    const fs::path sum_path = root / detail::suffixed("summary", panel.name, ".csv");
    {
      auto os = open_out(sum_path);
      os << kSummaryHeader << '\n';
      for (const auto& name : order) acc[name].write(os, name);
    }
    res.files.push_back(sum_path);

    PanelResult pr{panel.name, panel.grid_values, {}};
    for (const auto& name : order) {
      const SummaryAccumulator& a = acc[name];
      LearnerSummary ls{name, a.count(), failed[name], a.mean_final_regret(), 0.0};
      double m = 0, se = 0;
      long n = 0;
      oco::detail::mean_se(a.final_regrets(), m, se, n);
      ls.se_final_regret = se;
      pr.learners.push_back(ls);
    }
    res.panels.push_back(std::move(pr));
  }

  if (is_adversary(rc.kind)) {
    const fs::path sp = root / "slope.json";
    open_out(sp) << detail::slope_report(rc, res.panels).dump(2) << '\n';
    res.files.push_back(sp);
  }
  res.exit_code = successes == 0 ? 3 : 0;
  return res;
}

}  // namespace oco::harness
