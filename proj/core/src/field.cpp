#include "statphase/field.hpp"

#include <algorithm>
#include <cmath>

#include "statphase/errors.hpp"

namespace statphase {

Box::Box(Point lo, Point hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.empty()) throw ValidationError("box corners must have equal nonzero length");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!(lo_[i] <= hi_[i])) throw ValidationError("box has lo > hi on axis " + std::to_string(i));
  }
}

Box Box::cube(int dim, double lo, double hi) {
  return Box(Point(static_cast<std::size_t>(dim), lo), Point(static_cast<std::size_t>(dim), hi));
}

Point Box::center() const {
  Point c(lo_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lo_[i] + hi_[i]);
  return c;
}

double Box::diameter() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += width(i) * width(i);
  return std::sqrt(s);
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= width(i);
  return v;
}

bool Box::contains(std::span<const double> x, double rel_tol) const {
  if (x.size() != lo_.size()) return false;
  double scale = 0.0;
  for (int i = 0; i < dim(); ++i) scale = std::max(scale, std::max(width(i), std::abs(lo(i)) + std::abs(hi(i))));
  const double slack = rel_tol * std::max(scale, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo_[i] - slack || x[i] > hi_[i] + slack) return false;
  }
  return true;
}

bool Box::strictly_contains(const Box& inner) const {
  if (inner.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!(lo(i) < inner.lo(i) && inner.hi(i) < hi(i))) return false;
  }
  return true;
}

Box Box::intersect(const Box& other) const {
  Point lo(lo_.size()), hi(lo_.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = std::max(lo_[i], other.lo_[i]);
    hi[i] = std::min(hi_[i], other.hi_[i]);
    if (lo[i] > hi[i]) throw DomainError("boxes do not intersect");
  }
  return Box(std::move(lo), std::move(hi));
}

Box Box::scaled_about_center(double factor) const {
  Point lo(lo_.size()), hi(lo_.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const double c = 0.5 * (lo_[i] + hi_[i]);
    const double h = 0.5 * (hi_[i] - lo_[i]) * factor;
    lo[i] = c - h;
    hi[i] = c + h;
  }
  return Box(std::move(lo), std::move(hi));
}

DerivativeTensor::DerivativeTensor(Point base, const Jet& jet)
    : base_(std::move(base)), order_(jet.order()), values_(jet.size()) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = jet.derivative_at(i);
}

double DerivativeTensor::operator[](const MultiIndex& alpha) const {
  const auto idx = JetSpace::get(dim()).index(alpha);
  if (idx >= values_.size()) throw CapabilityError("derivative order exceeds the tensor order");
  return values_[idx];
}

double DerivativeTensor::partial(std::span<const int> axes) const {
  MultiIndex alpha{};
  for (int a : axes) {
    if (a < 0 || a >= dim()) throw DomainError("axis out of range");
    alpha[static_cast<std::size_t>(a)]++;
  }
  return (*this)[alpha];
}

std::vector<double> DerivativeTensor::gradient() const {
  if (order_ < 1) throw CapabilityError("gradient needs order >= 1");
  return {values_.begin() + 1, values_.begin() + 1 + dim()};
}

std::vector<double> DerivativeTensor::hessian() const {
  if (order_ < 2) throw CapabilityError("hessian needs order >= 2");
  const int d = dim();
  std::vector<double> h(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int axes[2] = {i, j};
      h[static_cast<std::size_t>(i * d + j)] = partial(axes);
    }
  }
  return h;
}

PhaseModel::PhaseModel(std::string family, Expr expr, Box domain, ParameterMap params,
                       std::map<std::string, std::string> choices)
    : family_(std::move(family)),
      expr_(std::move(expr)),
      domain_(std::move(domain)),
      params_(std::move(params)),
      choices_(std::move(choices)),
      tape_(expr_, domain_.dim(), params_) {}

double PhaseModel::value(std::span<const double> x) const {
  if (!domain_.contains(x)) throw DomainError("point outside the phase domain");
  return tape_.value(x);
}

Jet PhaseModel::jet(std::span<const double> x, int order) const {
  if (!domain_.contains(x)) throw DomainError("point outside the phase domain");
  if (order > kMaxJetOrder) throw CapabilityError("derivative order exceeds the engine cap");
  return tape_.jet(x, order);
}

PhaseModel PhaseModel::scaled(double factor) const {
  auto params = params_;
  params["scale"] = {factor * (params_.count("scale") ? params_.at("scale")[0] : 1.0)};
  return PhaseModel(family_, Expr(factor) * expr_, domain_, std::move(params), choices_);
}

PhaseModel PhaseModel::with_domain(Box domain) const {
  return PhaseModel(family_, expr_, std::move(domain), params_, choices_);
}

SymbolModel::SymbolModel(std::string family, Expr expr, Box support, int smoothness, ParameterMap params)
    : family_(std::move(family)),
      support_(std::move(support)),
      smoothness_(smoothness),
      params_(std::move(params)),
      tape_(expr, support_.dim(), params_) {}

double SymbolModel::value(std::span<const double> x) const {
  if (!support_.contains(x, 0.0)) return 0.0;
  return tape_.value(x);
}

Jet SymbolModel::jet(std::span<const double> x, int order) const {
  if (smoothness_ >= 0 && order > smoothness_) {
    throw CapabilityError("symbol '" + family_ + "' is only C^" + std::to_string(smoothness_));
  }
  if (!support_.contains(x, 0.0)) return Jet(dim(), order);
  return tape_.jet(x, order);
}

DerivativeTensor derivatives_at(const PhaseModel& phase, std::span<const double> point, int order) {
  if (static_cast<int>(point.size()) != phase.dim()) throw DomainError("point dimension mismatch");
  return DerivativeTensor(Point(point.begin(), point.end()), phase.jet(point, order));
}

DerivativeTensor derivatives_at(const SymbolModel& symbol, std::span<const double> point, int order) {
  if (static_cast<int>(point.size()) != symbol.dim()) throw DomainError("point dimension mismatch");
  if (order > kMaxJetOrder) throw CapabilityError("derivative order exceeds the engine cap");
  return DerivativeTensor(Point(point.begin(), point.end()), symbol.jet(point, order));
}

}  // namespace statphase
