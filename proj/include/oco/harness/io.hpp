#pragma once

#include "oco/learners/runner.hpp"

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace oco::harness {

inline constexpr const char* kTraceHeader =
    "t,learner,trial,instant_loss,cumulative_loss,benchmark_cumulative,regret,switched";

/// Round-trip formatting, identical on every run.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

/// One row per round; benchmark columns are prefix sums at the final x*.
inline void write_trace_csv(std::ostream& os, const RegretTrace& tr, long trial) {
  os << kTraceHeader << '\n';
  double cum = 0.0;
  for (std::size_t i = 0; i < tr.rounds.size(); ++i) {
    const RoundRecord& r = tr.rounds[i];
    cum += r.loss;
    const double bench = i < tr.benchmark_prefix.size() ? tr.benchmark_prefix[i] : std::nan("");
    os << r.t << ',' << tr.learner << ',' << trial << ',' << num(r.loss) << ',' << num(cum) << ',' << num(bench)
       << ',' << num(cum - bench) << ',' << (r.switched ? 1 : 0) << '\n';
  }
}

/// Per-round means over the successful trials of one learner. Rows share the
/// trace columns (trial = "mean"), followed by the regret standard error
/// and the number of trials aggregated.
class SummaryAccumulator {
 public:
  void add(const RegretTrace& tr) {
    if (!tr.ok()) return;
    const std::size_t T = tr.rounds.size();
    if (loss_.size() < T) {
      for (auto* v : {&loss_, &cum_, &bench_, &regret_, &regret_sq_, &switched_}) v->resize(T, 0.0);
    }
    double cum = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      cum += tr.rounds[i].loss;
      const double r = cum - tr.benchmark_prefix[i];
      loss_[i] += tr.rounds[i].loss;
      cum_[i] += cum;
      bench_[i] += tr.benchmark_prefix[i];
      regret_[i] += r;
      regret_sq_[i] += r * r;
      switched_[i] += tr.rounds[i].switched ? 1.0 : 0.0;
    }
    final_regret_.push_back(tr.regret);
    ++n_;
  }

  long count() const { return n_; }
  double mean_final_regret() const { return n_ ? regret_.back() / n_ : std::nan(""); }
  const std::vector<double>& final_regrets() const { return final_regret_; }

  void write(std::ostream& os, const std::string& learner) const {
    if (n_ == 0) return;
    const double n = static_cast<double>(n_);
    for (std::size_t i = 0; i < loss_.size(); ++i) {
      const double mean = regret_[i] / n;
      const double var = n_ > 1 ? std::max(0.0, (regret_sq_[i] - n * mean * mean) / (n - 1.0)) : 0.0;
      os << i + 1 << ',' << learner << ",mean," << num(loss_[i] / n) << ',' << num(cum_[i] / n) << ','
         << num(bench_[i] / n) << ',' << num(mean) << ',' << num(switched_[i] / n) << ','
         << num(std::sqrt(var / n)) << ',' << n_ << '\n';
    }
  }

 private:
  std::vector<double> loss_, cum_, bench_, regret_, regret_sq_, switched_;
  std::vector<double> final_regret_;
  long n_ = 0;
};

inline constexpr const char* kSummaryHeader =
    "t,learner,trial,instant_loss,cumulative_loss,benchmark_cumulative,regret,switched,regret_se,trials";

}  // namespace oco::harness
