#pragma once

#include "oco/core/types.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <variant>

namespace oco {

namespace sets {

struct Unconstrained {};

/// {x : ||x||_W <= radius}
struct Ball {
  double radius = 1.0;
};

/// Coordinatewise [lo_i, hi_i].
struct Box {
  Vec lo;
  Vec hi;
};

/// Sequence of d x d matrices (column-major, concatenated) with
/// ||M^[s]||_2 <= bound[s]. The DAC parameter set.
struct SpectralBlocks {
  int d = 1;
  Vec bound;
};

}  // namespace sets

using FeasibleSet = std::variant<sets::Unconstrained, sets::Ball, sets::Box, sets::SpectralBlocks>;

/// Closed convex decision set together with a diagonal inner product
/// <x, y>_W = sum_i w_i x_i y_i. Gradients handed around the library are
/// Euclidean partials; riesz() maps them to the W-geometry.
///
/// Projections are exact in the W-norm: balls are measured in W, boxes are
/// separable, and spectral blocks carry block-constant weights.
class DecisionSpace {
 public:
  DecisionSpace() = default;
  DecisionSpace(Vec weights, FeasibleSet set) : weights_(std::move(weights)), set_(std::move(set)) {
    require((weights_.array() > 0.0).all(), "decision-space weights must be positive");
    if (const auto* box = std::get_if<sets::Box>(&set_)) {
      require_shape(box->lo.size() == dim() && box->hi.size() == dim(), "box bounds do not match dimension");
      require((box->lo.array() <= box->hi.array()).all(), "box lower bound exceeds upper bound");
    }
    if (const auto* sb = std::get_if<sets::SpectralBlocks>(&set_)) {
      require_shape(sb->bound.size() * sb->d * sb->d == dim(), "spectral block layout does not match dimension");
    }
    if (const auto* ball = std::get_if<sets::Ball>(&set_)) require(ball->radius >= 0.0, "ball radius must be >= 0");
  }

  static DecisionSpace euclidean(Eigen::Index dim, FeasibleSet set) {
    return DecisionSpace(Vec::Ones(dim), std::move(set));
  }
  static DecisionSpace interval(double lo, double hi) {
    return euclidean(1, sets::Box{Vec::Constant(1, lo), Vec::Constant(1, hi)});
  }
  static DecisionSpace cube(Eigen::Index dim, double half_width) {
    return euclidean(dim, sets::Box{Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width)});
  }
  static DecisionSpace ball(Eigen::Index dim, double radius) { return euclidean(dim, sets::Ball{radius}); }

  Eigen::Index dim() const { return weights_.size(); }
  const Vec& weights() const { return weights_; }
  const FeasibleSet& set() const { return set_; }

  double inner(const Vec& a, const Vec& b) const { return (weights_.array() * a.array() * b.array()).sum(); }
  double norm(const Vec& x) const { return std::sqrt(inner(x, x)); }
  double dual_norm(const Vec& g) const { return std::sqrt((g.array().square() / weights_.array()).sum()); }
  Vec riesz(const Vec& g) const { return (g.array() / weights_.array()).matrix(); }

  Vec project(const Vec& x) const {
    require_shape(x.size() == dim(), "decision dimension mismatch");
    return std::visit([&](const auto& s) { return project_onto(s, x); }, set_);
  }

  bool contains(const Vec& x, double tol = 1e-9) const {
    if (x.size() != dim() || !x.allFinite()) return false;
    return norm(project(x) - x) <= tol;
  }

  /// argmin over the set of the Euclidean pairing <c, x>.
  Vec linear_minimizer(const Vec& c) const {
    require_shape(c.size() == dim(), "coefficient dimension mismatch");
    return std::visit([&](const auto& s) { return lmo(s, c); }, set_);
  }

  /// sup_x ||x||_W^2 over the set (infinite when unbounded).
  double max_sq_norm() const {
    return std::visit([&](const auto& s) { return max_sq(s); }, set_);
  }

 private:
  Vec project_onto(const sets::Unconstrained&, const Vec& x) const { return x; }
  Vec project_onto(const sets::Ball& b, const Vec& x) const {
    const double n = norm(x);
    return n <= b.radius ? x : Vec(x * (b.radius / n));
  }
  Vec project_onto(const sets::Box& b, const Vec& x) const { return x.cwiseMax(b.lo).cwiseMin(b.hi); }
  Vec project_onto(const sets::SpectralBlocks& sb, const Vec& x) const {
    Vec out = x;
    const int d = sb.d;
    for (Eigen::Index s = 0; s < sb.bound.size(); ++s) {
      Eigen::Map<Mat> block(out.data() + s * d * d, d, d);
      Eigen::JacobiSVD<Mat> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec& sv = svd.singularValues();
      if (sv.size() == 0 || sv(0) <= sb.bound(s)) continue;
      const Vec clipped = sv.cwiseMin(sb.bound(s));
      block = svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
    }
    return out;
  }

  Vec lmo(const sets::Unconstrained&, const Vec& c) const {
    if (!c.isZero(0.0)) throw InvalidParameter("linear objective is unbounded below on an unconstrained set");
    return Vec::Zero(dim());
  }
  Vec lmo(const sets::Ball& b, const Vec& c) const {
    const double dn = dual_norm(c);
    if (dn == 0.0) return Vec::Zero(dim());
    return -b.radius * riesz(c) / dn;
  }
  Vec lmo(const sets::Box& b, const Vec& c) const {
    Vec x(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (c(i) > 0.0) x(i) = b.lo(i);
      else if (c(i) < 0.0) x(i) = b.hi(i);
      else x(i) = std::clamp(0.0, b.lo(i), b.hi(i));
    }
    return x;
  }
  Vec lmo(const sets::SpectralBlocks& sb, const Vec& c) const {
    Vec x = Vec::Zero(dim());
    const int d = sb.d;
    for (Eigen::Index s = 0; s < sb.bound.size(); ++s) {
      Eigen::Map<const Mat> cb(c.data() + s * d * d, d, d);
      Eigen::JacobiSVD<Mat> svd(cb, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::Map<Mat> xb(x.data() + s * d * d, d, d);
      // Only directions with nonzero singular value carry a descent direction.
      Mat uv = Mat::Zero(d, d);
      for (int i = 0; i < d; ++i) {
        if (svd.singularValues()(i) > 0.0) uv += svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
      }
      xb = -sb.bound(s) * uv;
    }
    return x;
  }

  double max_sq(const sets::Unconstrained&) const { return std::numeric_limits<double>::infinity(); }
  double max_sq(const sets::Ball& b) const { return b.radius * b.radius; }
  double max_sq(const sets::Box& b) const {
    return (weights_.array() * b.lo.array().square().max(b.hi.array().square())).sum();
  }
  double max_sq(const sets::SpectralBlocks& sb) const {
    double total = 0.0;
    const int dd = sb.d * sb.d;
    for (Eigen::Index s = 0; s < sb.bound.size(); ++s) {
      // ||M||_F^2 <= d ||M||_2^2, attained by a scaled orthogonal matrix.
      total += weights_(s * dd) * sb.d * sb.bound(s) * sb.bound(s);
    }
    return total;
  }

  Vec weights_;
  FeasibleSet set_ = sets::Unconstrained{};
};

}  // namespace oco
