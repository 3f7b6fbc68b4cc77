#include "oco/harness/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace {

using namespace oco;
using namespace oco::harness;

json load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  json cfg = load_config(path);
  for (const auto& s : sets) apply_override(cfg, s);
  return cfg;
}

int cmd_run(const std::string& path, const std::vector<std::string>& sets) {
  const RunConfig rc = parse_run_config(load_with_overrides(path, sets));
  const RunResult res = run_experiment(rc);
  for (const PanelResult& p : res.panels) {
    std::cout << (p.name.empty() ? kind_name(rc.kind) : p.name) << '\n';
    for (const LearnerSummary& l : p.learners)
      std::cout << fmt::format("  {:<10} final regret {:>12.4f} +- {:<10.4f} ({} ok, {} failed)\n", l.learner,
                               l.mean_final_regret, l.se_final_regret, l.ok, l.failed);
  }
  std::cout << "wrote " << res.files.size() << " files to " << rc.out_dir << '\n';
  if (res.exit_code == 3) std::cerr << "error: solver failed in every trial (see errors.csv)\n";
  return res.exit_code;
}

int cmd_analyze(const std::string& path, const std::vector<std::string>& sets) {
  const json cfg = load_with_overrides(path, sets);
  if (cfg.contains("dynamics")) {
    const long T = get_or<long>(cfg, "T", 1);
    if (T < 1) throw ConfigError("T must be >= 1");
    const LearnerSettings s = parse_learner(section(cfg, "learner"), ExperimentKind::adversary_finite);
    std::cout << analyze_dynamics(section(cfg, "dynamics"), s, T).dump(2) << '\n';
    return 0;
  }
  const RunConfig rc = parse_run_config(cfg);
  json out = json::array();
  for (const Panel& p : rc.panels) {
    std::unique_ptr<Environment> env;
    try {
      env = make_environment(rc.kind, p.environment, rc.T, rc.seed, 0);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid environment: ") + e.what());
    }
    json j = analysis_json(rc.kind, *env, p.environment, rc.learner, rc.T);
    j["panel"] = p.name;
    out.push_back(std::move(j));
  }
  std::cout << (out.size() == 1 ? out[0] : out).dump(2) << '\n';
  return 0;
}

struct LowerBoundArgs {
  std::string kind = "finite";
  std::vector<int> m{4};
  std::vector<double> rho{0.5};
  double p = 2.0;
  double L = 1.0;
  long T = 4096;
  long trials = 500;
  std::uint64_t seed = 7;
  unsigned threads = 0;
  std::string out;
  bool signs = false;
};

int cmd_lowerbound(LowerBoundArgs a) {
  if (a.kind != "finite" && a.kind != "discounted") throw ConfigError("--kind must be finite or discounted");
  if (a.T < 1 || a.trials < 1) throw ConfigError("--T and --trials must be >= 1");
  if (const char* env = std::getenv("OCO_OUT_DIR"); env && *env) a.out = env;
  const bool finite = a.kind == "finite";
  const std::size_t n = finite ? a.m.size() : a.rho.size();

  json report;
  report["kind"] = a.kind;
  report["T"] = a.T;
  report["trials"] = a.trials;
  report["seed"] = a.seed;
  report["rows"] = json::array();
  std::vector<double> xs, ys;
  std::string table = "kind,m,rho,T,trials,failed,mean_regret,std_err,mean_loss,loss_std_err,reference_0.1_m_sqrtT\n";
  std::string signs = "setting,trial,block,sign\n";
  std::cout << fmt::format("{:>4} {:>6} {:>14} {:>10} {:>12} {:>10}\n", "m", "rho", "mean regret", "std err",
                           "mean loss", "loss se");
  for (std::size_t i = 0; i < n; ++i) {
    LowerBoundSpec spec;
    spec.kind = finite ? AdversaryKind::finite : AdversaryKind::discounted;
    if (finite) spec.m = a.m[i];
    else spec.rho = a.rho[i];
    spec.p = a.p;
    spec.L = a.L;
    spec.T = a.T;
    spec.trials = a.trials;
    spec.seed = a.seed;
    spec.threads = a.threads;
    BlockAdversary probe;
    try {
      probe = spec.adversary(0);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    const LowerBoundResult r = empirical_lower_bound(tuned_ftrl_learner(), spec);
    const double ref = 0.1 * probe.m * std::sqrt(static_cast<double>(a.T));
    std::cout << fmt::format("{:>4} {:>6} {:>14.4f} {:>10.4f} {:>12.4f} {:>10.4f}\n", probe.m,
                             finite ? std::string("-") : fmt::format("{}", spec.rho), r.mean_regret, r.std_err,
                             r.mean_loss, r.loss_std_err);
    table += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", a.kind, probe.m, finite ? num(0.0) : num(spec.rho),
                         a.T, r.trials, r.failed, num(r.mean_regret), num(r.std_err), num(r.mean_loss),
                         num(r.loss_std_err), num(ref));
    report["rows"].push_back({{"m", probe.m}, {"rho", finite ? json(nullptr) : json(spec.rho)},
                              {"mean_regret", r.mean_regret}, {"std_err", r.std_err}, {"mean_loss", r.mean_loss},
                              {"loss_std_err", r.loss_std_err}, {"failed", r.failed},
                              {"reference_0.1_m_sqrtT", ref}});
    if (r.failed < r.trials && r.mean_regret > 0.0) {
      xs.push_back(probe.m);
      ys.push_back(r.mean_regret);
    }
    if (a.signs)
      for (long t = 0; t < a.trials; ++t) {
        std::ostringstream os;
        write_signs_csv(os, t, spec.adversary(t));
        std::istringstream is(os.str());
        for (std::string line; std::getline(is, line);) signs += std::to_string(i) + "," + line + "\n";
      }
    if (r.failed == r.trials) {
      std::cerr << "error: solver failed in every trial\n";
      return 3;
    }
  }
  bool distinct = xs.size() >= 2;
  for (std::size_t i = 1; i < xs.size(); ++i) distinct = distinct && xs[i] != xs[0];
  report["loglog_slope"] = distinct ? json(loglog_slope(xs, ys)) : json(nullptr);
  if (distinct) std::cout << fmt::format("log-log slope of mean regret vs m: {:.4f}\n", loglog_slope(xs, ys));
  if (!a.out.empty()) {
    const std::filesystem::path root(a.out);
    open_out(root / "lowerbound.csv") << table;
    open_out(root / "lowerbound.json") << report.dump(2) << '\n';
    if (a.signs) open_out(root / "signs.csv") << signs;
    std::cout << "wrote results to " << a.out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online convex optimization with unbounded memory: experiment harness"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--set", sets, "Override a config value, e.g. --set learner.S=4");

  std::string aconfig;
  std::vector<std::string> asets;
  auto* analyze = app.add_subcommand("analyze", "Print memory capacity, Lipschitz constants, step size and bounds");
  analyze->add_option("--config", aconfig, "Config file")->required();
  analyze->add_option("--set", asets, "Override a config value");

  LowerBoundArgs lb;
  auto* lower = app.add_subcommand("lowerbound", "Monte-Carlo regret of tuned FTRL against the block adversary");
  lower->add_option("--kind", lb.kind, "finite or discounted")->capture_default_str();
  lower->add_option("--m", lb.m, "Memory lengths (finite kind)")->capture_default_str();
  lower->add_option("--rho", lb.rho, "Discount factors (discounted kind)")->capture_default_str();
  lower->add_option("--p", lb.p, "History norm exponent")->capture_default_str();
  lower->add_option("--L", lb.L, "Lipschitz constant")->capture_default_str();
  lower->add_option("--T", lb.T, "Horizon")->capture_default_str();
  lower->add_option("--trials", lb.trials, "Trials per setting")->capture_default_str();
  lower->add_option("--seed", lb.seed, "Base seed")->capture_default_str();
  lower->add_option("--threads", lb.threads, "Worker threads (0: all cores)")->capture_default_str();
  lower->add_option("--out", lb.out, "Output directory");
  lower->add_flag("--signs", lb.signs, "Also export the sign sequences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config, sets);
    if (*analyze) return cmd_analyze(aconfig, asets);
    if (*lower) return cmd_lowerbound(lb);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const oco::InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const oco::ShapeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
