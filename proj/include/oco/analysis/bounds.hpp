#pragma once

#include "oco/core/types.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <string>

namespace oco {

/// D/eta + eta T Lc^2 / alpha + eta T L Lc H / alpha.
inline double regret_bound_value(double D, double alpha, double eta, long T, double L, double L_circ, double H) {
  require(alpha > 0.0 && eta > 0.0 && T > 0, "regret bound needs alpha, eta, T > 0");
  const double t = static_cast<double>(T);
  return D / eta + eta * t * L_circ * L_circ / alpha + eta * t * L * L_circ * H / alpha;
}

/// Mini-batch form: S D/eta + eta T Lc^2/alpha + eta T L Lc H / (S alpha).
inline double minibatch_regret_bound(double D, double alpha, double eta, long T, double L, double L_circ, double H,
                                     long S) {
  require(S >= 1, "S must be >= 1");
  const double s = static_cast<double>(S);
  const double t = static_cast<double>(T);
  require(alpha > 0.0 && eta > 0.0 && T > 0, "regret bound needs alpha, eta, T > 0");
  return s * D / eta + eta * t * L_circ * L_circ / alpha + eta * t * L * L_circ * H / (s * alpha);
}

/// Finite memory m with batch size S = m:
/// m D/eta + eta T Lc^2/alpha + eta T L Lc sqrt(m)/alpha.
inline double finite_minibatch_regret_bound(double D, double alpha, double eta, long T, double L, double L_circ, int m) {
  require(m >= 1, "m must be >= 1");
  return minibatch_regret_bound(D, alpha, eta, T, L, L_circ, std::pow(static_cast<double>(m), 1.5), m);
}

/// eta for the finite-memory mini-batch bound: sqrt(alpha m D / (T Lc (L sqrt(m) + Lc))).
inline double finite_minibatch_step_size(double D, double alpha, double L, double L_circ, long T, int m) {
  require(D > 0 && alpha > 0 && L > 0 && L_circ > 0 && T > 0 && m >= 1, "step size inputs must be positive");
  const double mm = static_cast<double>(m);
  return std::sqrt(alpha * mm * D / (static_cast<double>(T) * L_circ * (L * std::sqrt(mm) + L_circ)));
}

struct BoundEntry {
  double value = 0.0;
  bool order_level = true;
};

/// Named bound values; order_level marks expressions evaluated with unit
/// absolute constant that are only meaningful up to O(.).
struct ConstantsBundle {
  std::map<std::string, BoundEntry> entries;

  double at(const std::string& k) const { return entries.at(k).value; }
  void set(const std::string& k, double v, bool order_level = true) {
    require(std::isfinite(v) && v >= 0.0, "bundle values must be finite and >= 0");
    entries[k] = {v, order_level};
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, e] : entries) j[k] = {{"value", e.value}, {"order_level", e.order_level}};
    return j;
  }
};

/// Online linear control with DAC policies.
inline ConstantsBundle olc_constants(double kappa, double rho, double d, double W, double L0, long T,
                                     double kappa_B = -1.0) {
  require(kappa >= 1.0 && W >= 1.0, "olc constants need kappa, W >= 1");
  require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  require(d >= 1.0 && L0 >= 0.0 && T >= 1, "need d >= 1, L0 >= 0, T >= 1");
  if (kappa_B < 0.0) kappa_B = kappa;
  const double g = 1.0 - rho;
  const double k4 = std::pow(kappa, 4), k8 = k4 * k4;
  const double sqT = std::sqrt(static_cast<double>(T));
  const double logT = std::log(static_cast<double>(T));

  ConstantsBundle b;
  const double DX = W * k8 * std::pow(g, -2.0);
  b.set("H2", k4 * std::pow(g, -1.5));
  b.set("D", d * k8 / g);
  b.set("D_X", DX);
  b.set("L", L0 * DX * W * kappa / g);
  b.set("L_circ", L0 * DX * W * std::pow(kappa, 5) * std::pow(g, -1.5));
  const double ours = L0 * W * W * sqT * std::sqrt(d) * std::pow(kappa, 17) * std::pow(g, -4.5);
  const double existing =
      L0 * W * W * std::pow(d, 1.5) * sqT * std::pow(logT, 3.5) * std::pow(kappa_B, 4) * std::pow(kappa, 18) *
      std::pow(g, -5.5);
  b.set("regret_bound", ours);
  b.set("existing_regret_bound", existing);
  b.set("improvement_ratio", d * std::pow(logT, 3.5) * std::pow(kappa_B, 4) * kappa / g);
  return b;
}

/// Online performative prediction with location-scale distributions.
inline ConstantsBundle opp_constants(double rho, double L0, double normF, double D_X, long T = 1) {
  require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  require(L0 >= 0.0 && normF >= 0.0 && D_X >= 0.0 && T >= 1, "opp constants need nonnegative inputs");
  ConstantsBundle b;
  b.set("H1", std::pow(1.0 - rho, -2.0));
  b.set("D", D_X * D_X);
  b.set("L", L0 * (1.0 - rho) / rho * normF);
  b.set("L_circ", L0 * normF / rho);
  b.set("regret_bound",
        D_X * L0 * std::sqrt(static_cast<double>(T)) * normF * std::pow(1.0 - rho, -0.5) / rho);
  return b;
}

}  // namespace oco
