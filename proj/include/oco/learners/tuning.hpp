#pragma once

#include "oco/core/types.hpp"

#include <cmath>

namespace oco {

/// eta = sqrt(alpha S D / (T Lc (L H / S + Lc))); S = 1 is the plain FTRL choice.
inline double tune_step_size(double D, double alpha, double L, double L_circ, double H, long T, long S = 1) {
  require(D > 0 && alpha > 0 && L > 0 && L_circ > 0 && H > 0 && T > 0 && S > 0,
          "tune_step_size inputs must be positive");
  const double s = static_cast<double>(S);
  return std::sqrt(alpha * s * D / (static_cast<double>(T) * L_circ * (L * H / s + L_circ)));
}

/// Step size used in the constant-input control experiment.
inline double one_over_sqrt_T(long T) {
  require(T > 0, "T must be positive");
  return 1.0 / std::sqrt(static_cast<double>(T));
}

}  // namespace oco
