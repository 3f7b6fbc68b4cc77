#pragma once

#include "oco/core/history.hpp"
#include "oco/core/types.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>

namespace oco {

/// f(h) = offset + sum_k <coef_k, h_k>.
struct AffineForm {
  History coef;
  double offset = 0.0;
};

/// Per-round loss on the history space. gradient() returns Euclidean
/// partials block by block (any subgradient at kinks).
class HistoryLoss {
 public:
  virtual ~HistoryLoss() = default;
  virtual double value(const History& h) const = 0;
  virtual History gradient(const History& h) const = 0;
  /// Declared Lipschitz constant w.r.t. the history norm (infinity if unknown).
  virtual double lipschitz() const { return std::numeric_limits<double>::infinity(); }
  /// Exact affine representation, when the loss is affine.
  virtual std::optional<AffineForm> affine() const { return std::nullopt; }
};

using LossPtr = std::shared_ptr<const HistoryLoss>;

class ZeroLoss final : public HistoryLoss {
 public:
  double value(const History&) const override { return 0.0; }
  History gradient(const History&) const override { return {}; }
  double lipschitz() const override { return 0.0; }
  std::optional<AffineForm> affine() const override { return AffineForm{}; }
};

class AffineLoss final : public HistoryLoss {
 public:
  AffineLoss(History coef, double offset, double lipschitz)
      : form_{std::move(coef), offset}, lipschitz_(lipschitz) {}

  double value(const History& h) const override {
    double v = form_.offset;
    const std::size_t n = std::min(h.size(), form_.coef.size());
    for (std::size_t k = 0; k < n; ++k) v += form_.coef[k].dot(h[k]);
    return v;
  }
  History gradient(const History&) const override { return form_.coef; }
  double lipschitz() const override { return lipschitz_; }
  std::optional<AffineForm> affine() const override { return form_; }
  const History& coef() const { return form_.coef; }

 private:
  AffineForm form_;
  double lipschitz_;
};

/// Loss built from callables; used for smooth test losses and wrappers.
class FunctionLoss final : public HistoryLoss {
 public:
  using ValueFn = std::function<double(const History&)>;
  using GradFn = std::function<History(const History&)>;

  FunctionLoss(ValueFn value, GradFn grad, double lipschitz = std::numeric_limits<double>::infinity())
      : value_(std::move(value)), grad_(std::move(grad)), lipschitz_(lipschitz) {}

  double value(const History& h) const override { return value_(h); }
  History gradient(const History& h) const override { return grad_(h); }
  double lipschitz() const override { return lipschitz_; }

 private:
  ValueFn value_;
  GradFn grad_;
  double lipschitz_;
};

inline LossPtr make_zero_loss() { return std::make_shared<ZeroLoss>(); }
inline LossPtr make_affine_loss(History coef, double offset, double lipschitz) {
  return std::make_shared<AffineLoss>(std::move(coef), offset, lipschitz);
}

}  // namespace oco
