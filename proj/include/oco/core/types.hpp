#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace oco {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dimension or block-shape mismatch between operands.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A parameter outside its admissible range (p < 1, eta <= 0, ...).
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Loss outside the family an environment can evaluate exactly.
struct UnsupportedLoss : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A series that has no finite tail certificate (H_1 = infinity).
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solver hit its iteration cap without meeting the tolerance.
/// Carries the best iterate seen so callers can keep a partial result.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, Vec best, double best_value)
      : std::runtime_error(what), best_iterate(std::move(best)), best_objective(best_value) {}
  Vec best_iterate;
  double best_objective;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw InvalidParameter(msg);
}

inline void require_shape(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace oco
