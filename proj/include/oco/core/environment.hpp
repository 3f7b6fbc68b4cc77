#pragma once

#include "oco/core/decision_space.hpp"
#include "oco/core/dynamics.hpp"
#include "oco/core/loss.hpp"

#include <string>

namespace oco {

/// Full-information, oblivious environment: f_t is fixed before the run and
/// revealed after x_t is played.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const Dynamics& dynamics() const = 0;
  virtual const DecisionSpace& space() const = 0;
  virtual long horizon() const = 0;
  /// f_t on the history space of dynamics(), 1 <= t <= horizon().
  virtual LossPtr loss(long t) const = 0;
  /// Lipschitz constant L of every f_t under the history norm.
  virtual double lipschitz() const = 0;
  virtual std::string name() const { return "environment"; }
};

}  // namespace oco
