#pragma once

#include "oco/core/types.hpp"

#include <limits>
#include <memory>
#include <optional>

namespace oco {

/// Convex per-round control cost c(s, u).
class StageCost {
 public:
  virtual ~StageCost() = default;
  virtual double value(const Vec& s, const Vec& u) const = 0;
  virtual void gradient(const Vec& s, const Vec& u, Vec& gs, Vec& gu) const = 0;
  /// (a, b) when c(s, u) = a.s + b.u.
  virtual std::optional<std::pair<Vec, Vec>> linear() const { return std::nullopt; }
  /// Declared Lipschitz constant L0 on the relevant region.
  virtual double lipschitz() const { return std::numeric_limits<double>::infinity(); }
};

using StageCostPtr = std::shared_ptr<const StageCost>;

/// c(s, u) = a.s + b.u; with a = 1, b = 0 this is the sum of state coordinates.
class LinearCost final : public StageCost {
 public:
  LinearCost(Vec a, Vec b) : a_(std::move(a)), b_(std::move(b)) {}
  static StageCostPtr state_sum(Eigen::Index d) { return std::make_shared<LinearCost>(Vec::Ones(d), Vec::Zero(d)); }

  double value(const Vec& s, const Vec& u) const override { return a_.dot(s) + b_.dot(u); }
  void gradient(const Vec&, const Vec&, Vec& gs, Vec& gu) const override {
    gs = a_;
    gu = b_;
  }
  std::optional<std::pair<Vec, Vec>> linear() const override { return std::make_pair(a_, b_); }
  double lipschitz() const override { return std::sqrt(a_.squaredNorm() + b_.squaredNorm()); }

 private:
  Vec a_, b_;
};

/// c(s, u) = s'Qs/2 + u'Ru/2 + a.s + b.u with Q, R positive semidefinite.
class QuadraticCost final : public StageCost {
 public:
  QuadraticCost(Mat Q, Mat R, Vec a, Vec b, double L0 = std::numeric_limits<double>::infinity())
      : Q_(std::move(Q)), R_(std::move(R)), a_(std::move(a)), b_(std::move(b)), L0_(L0) {}

  double value(const Vec& s, const Vec& u) const override {
    return 0.5 * s.dot(Q_ * s) + 0.5 * u.dot(R_ * u) + a_.dot(s) + b_.dot(u);
  }
  void gradient(const Vec& s, const Vec& u, Vec& gs, Vec& gu) const override {
    gs = 0.5 * (Q_ + Q_.transpose()) * s + a_;
    gu = 0.5 * (R_ + R_.transpose()) * u + b_;
  }
  double lipschitz() const override { return L0_; }

 private:
  Mat Q_, R_;
  Vec a_, b_;
  double L0_;
};

}  // namespace oco
