#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "statphase/expr.hpp"
#include "statphase/jet.hpp"

namespace statphase {

using Point = std::vector<double>;

/// Closed axis-aligned box [lo, hi]. A box with lo == hi on an axis is degenerate on that axis.
class Box {
 public:
  Box() = default;
  Box(Point lo, Point hi);
  static Box cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo_.size()); }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  double lo(int i) const { return lo_[static_cast<std::size_t>(i)]; }
  double hi(int i) const { return hi_[static_cast<std::size_t>(i)]; }
  double width(int i) const { return hi(i) - lo(i); }
  Point center() const;
  double diameter() const;
  double volume() const;

  /// Membership with a relative slack of `rel_tol` times the largest width.
  bool contains(std::span<const double> x, double rel_tol = 1e-12) const;
  /// True when `inner` lies in the interior of this box on every axis.
  bool strictly_contains(const Box& inner) const;
  Box intersect(const Box& other) const;
  Box scaled_about_center(double factor) const;

 private:
  Point lo_, hi_;
};

/// Every derivative D^alpha f(x0), |alpha| <= order, stored once per sorted multi-index.
class DerivativeTensor {
 public:
  DerivativeTensor(Point base, const Jet& jet);

  const Point& base() const { return base_; }
  int order() const { return order_; }
  int dim() const { return static_cast<int>(base_.size()); }
  double value() const { return values_[0]; }

  double operator[](const MultiIndex& alpha) const;
  /// Mixed partial by an unordered list of axes, e.g. {0, 1, 0} is d^3 / dx0^2 dx1.
  double partial(std::span<const int> axes) const;
  std::vector<double> gradient() const;
  /// Row-major d x d.
  std::vector<double> hessian() const;
  std::span<const double> values() const { return values_; }

 private:
  Point base_;
  int order_;
  std::vector<double> values_;
};

class PhaseModel {
 public:
  PhaseModel(std::string family, Expr expr, Box domain, ParameterMap params = {},
             std::map<std::string, std::string> choices = {});

  const std::string& family() const { return family_; }
  int dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }
  const ParameterMap& parameters() const { return params_; }
  const std::map<std::string, std::string>& choices() const { return choices_; }
  const Expr& expr() const { return expr_; }

  /// Phi(x); x must lie in the domain.
  double value(std::span<const double> x) const;
  /// Taylor jet of Phi at x; x must lie in the domain.
  Jet jet(std::span<const double> x, int order) const;
  /// Unchecked evaluation used by inner loops that already validated their grids.
  double value_unchecked(std::span<const double> x) const { return tape_.value(x); }
  Jet jet_unchecked(std::span<const double> x, int order) const { return tape_.jet(x, order); }

  /// factor * Phi on the same domain.
  PhaseModel scaled(double factor) const;
  PhaseModel with_domain(Box domain) const;

 private:
  std::string family_;
  Expr expr_;
  Box domain_;
  ParameterMap params_;
  std::map<std::string, std::string> choices_;
  Tape tape_;
};

class SymbolModel {
 public:
  /// smoothness < 0 means C-infinity.
  SymbolModel(std::string family, Expr expr, Box support, int smoothness = -1, ParameterMap params = {});

  const std::string& family() const { return family_; }
  int dim() const { return support_.dim(); }
  const Box& support() const { return support_; }
  int smoothness() const { return smoothness_; }
  const ParameterMap& parameters() const { return params_; }

  /// b(x), exactly zero outside the support box.
  double value(std::span<const double> x) const;
  Jet jet(std::span<const double> x, int order) const;

 private:
  std::string family_;
  Box support_;
  int smoothness_;
  ParameterMap params_;
  Tape tape_;
};

DerivativeTensor derivatives_at(const PhaseModel& phase, std::span<const double> point, int order);
DerivativeTensor derivatives_at(const SymbolModel& symbol, std::span<const double> point, int order);

}  // namespace statphase
