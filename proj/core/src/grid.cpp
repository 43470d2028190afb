#include "statphase/grid.hpp"

#include <cmath>

#include "statphase/errors.hpp"

namespace statphase {

UniformGrid::UniformGrid(Box box, std::vector<int> counts) : box_(std::move(box)), counts_(std::move(counts)) {
  for (int c : counts_) size_ *= static_cast<std::size_t>(c);
}

UniformGrid UniformGrid::with_step(const Box& box, double step) {
  if (!(step > 0.0)) throw ValidationError("grid step must be positive");
  std::vector<int> counts;
  for (int i = 0; i < box.dim(); ++i) {
    const double w = box.width(i);
    if (w == 0.0) {
      counts.push_back(1);
      continue;
    }
    if (w < step * (1.0 - 1e-12)) throw ValidationError("empty grid: box is narrower than the grid step");
    const double n = std::ceil(w / step - 1e-9);
    if (n > 1e7) throw ResourceError("grid step too small for the box");
    counts.push_back(static_cast<int>(n) + 1);
  }
  return UniformGrid(box, std::move(counts));
}

UniformGrid UniformGrid::with_points(const Box& box, int per_axis) {
  if (per_axis < 1) throw ValidationError("grid needs at least one point per axis");
  std::vector<int> counts;
  for (int i = 0; i < box.dim(); ++i) counts.push_back(box.width(i) == 0.0 ? 1 : std::max(per_axis, 2));
  return UniformGrid(box, std::move(counts));
}

double UniformGrid::spacing() const {
  double h = 0.0;
  for (int i = 0; i < dim(); ++i) {
    if (count(i) > 1) h = std::max(h, box_.width(i) / (count(i) - 1));
  }
  return h;
}

void UniformGrid::point(std::size_t flat, std::span<double> out) const {
  for (int i = dim() - 1; i >= 0; --i) {
    const auto n = static_cast<std::size_t>(count(i));
    const auto k = flat % n;
    flat /= n;
    out[static_cast<std::size_t>(i)] =
        n == 1 ? box_.lo(i) : (k + 1 == n ? box_.hi(i) : box_.lo(i) + box_.width(i) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
}

Point UniformGrid::point(std::size_t flat) const {
  Point p(static_cast<std::size_t>(dim()));
  point(flat, p);
  return p;
}

}  // namespace statphase
