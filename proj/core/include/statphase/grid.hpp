#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "statphase/field.hpp"

namespace statphase {

/// Tensor grid over a closed box, endpoints included, points addressed by a flat row-major index.
class UniformGrid {
 public:
  /// Spacing at most `step` on every axis; a zero-width axis gets one point.
  /// Throws ValidationError when the box is narrower than `step` on a nondegenerate axis.
  static UniformGrid with_step(const Box& box, double step);
  static UniformGrid with_points(const Box& box, int per_axis);

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  std::size_t size() const { return size_; }
  int count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
  /// Largest per-axis spacing (0 for a single point).
  double spacing() const;

  void point(std::size_t flat, std::span<double> out) const;
  Point point(std::size_t flat) const;

 private:
  UniformGrid(Box box, std::vector<int> counts);

  Box box_;
  std::vector<int> counts_;
  std::size_t size_ = 1;
};

}  // namespace statphase
