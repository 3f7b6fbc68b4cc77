#pragma once

#include "oco/core/types.hpp"

#include <algorithm>
#include <ostream>
#include <vector>

namespace oco {

/// Element of the history space: an ordered list of decision-space blocks.
/// Block k holds the lag-k contribution. Missing trailing blocks are zero,
/// so an empty list is the zero history.
///
/// The same type carries cotangents (partial derivatives of a loss with
/// respect to each block), which live in the dual space but share the layout.
class History {
 public:
  History() = default;
  explicit History(std::vector<Vec> blocks) : blocks_(std::move(blocks)) {}

  static History single(Vec block) {
    History h;
    h.blocks_.push_back(std::move(block));
    return h;
  }

  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  const Vec& operator[](std::size_t k) const { return blocks_[k]; }
  Vec& operator[](std::size_t k) { return blocks_[k]; }
  const std::vector<Vec>& blocks() const { return blocks_; }
  std::vector<Vec>& blocks() { return blocks_; }

  void push_back(Vec v) { blocks_.push_back(std::move(v)); }
  void truncate(std::size_t n) {
    if (blocks_.size() > n) blocks_.resize(n);
  }

  /// Number of blocks that are not identically zero.
  std::size_t nonzero_blocks() const {
    return static_cast<std::size_t>(
        std::count_if(blocks_.begin(), blocks_.end(), [](const Vec& b) { return !b.isZero(0.0); }));
  }

  /// this += alpha * other, zero-extending as needed.
  History& axpy(double alpha, const History& other) {
    if (other.size() > size()) {
      const Eigen::Index dim = other[0].size();
      while (blocks_.size() < other.size()) blocks_.push_back(Vec::Zero(dim));
    }
    for (std::size_t k = 0; k < other.size(); ++k) {
      require_shape(blocks_[k].size() == other[k].size(), "history block dimension mismatch");
      blocks_[k] += alpha * other[k];
    }
    return *this;
  }

  History& operator+=(const History& other) { return axpy(1.0, other); }

  History& operator*=(double alpha) {
    for (auto& b : blocks_) b *= alpha;
    return *this;
  }

  friend History operator+(History a, const History& b) { return a += b; }
  friend History operator*(double alpha, History h) { return h *= alpha; }

  /// Max abs entrywise difference, zero-extending the shorter operand.
  friend double max_abs_diff(const History& a, const History& b) {
    double worst = 0.0;
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) {
      if (k < a.size() && k < b.size()) {
        worst = std::max(worst, (a[k] - b[k]).cwiseAbs().maxCoeff());
      } else {
        const Vec& v = k < a.size() ? a[k] : b[k];
        worst = std::max(worst, v.cwiseAbs().maxCoeff());
      }
    }
    return worst;
  }

 private:
  std::vector<Vec> blocks_;
};

/// Flat CSV dump, one row per block. Debug aid only.
inline void write_csv(std::ostream& os, const History& h) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, ",", "\n", "", "", "", "");
  for (std::size_t k = 0; k < h.size(); ++k) os << h[k].transpose().format(fmt) << '\n';
}

}  // namespace oco
