#include "statphase/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "statphase/errors.hpp"

namespace statphase {

int total_order(const MultiIndex& alpha) {
  int s = 0;
  for (auto a : alpha) s += a;
  return s;
}

namespace {

// Enumerates all multi-indices of total order `order` in `dim` variables, first axis fastest-decreasing.
void enumerate(int dim, int order, int axis, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (axis == dim - 1) {
    cur[static_cast<std::size_t>(axis)] = static_cast<std::uint8_t>(order);
    out.push_back(cur);
    cur[static_cast<std::size_t>(axis)] = 0;
    return;
  }
  for (int k = order; k >= 0; --k) {
    cur[static_cast<std::size_t>(axis)] = static_cast<std::uint8_t>(k);
    enumerate(dim, order - k, axis + 1, cur, out);
  }
  cur[static_cast<std::size_t>(axis)] = 0;
}

using DerivBuffer = boost::container::small_vector<double, kMaxJetOrder + 1>;

double factorial_of(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

JetSpace::JetSpace(int dim) : dim_(dim), max_order_(kMaxJetOrder) {
  MultiIndex cur{};
  size_upto_.reserve(static_cast<std::size_t>(max_order_) + 1);
  for (int m = 0; m <= max_order_; ++m) {
    enumerate(dim_, m, 0, cur, alphas_);
    size_upto_.push_back(alphas_.size());
  }

  std::size_t table = 1;
  for (int i = 0; i < dim_; ++i) table *= static_cast<std::size_t>(max_order_ + 1);
  lookup_.assign(table, -1);
  factorial_.resize(alphas_.size());
  multiplicity_.resize(alphas_.size());
  for (std::size_t idx = 0; idx < alphas_.size(); ++idx) {
    std::size_t key = 0;
    double fact = 1.0;
    for (int i = dim_ - 1; i >= 0; --i) {
      key = key * static_cast<std::size_t>(max_order_ + 1) + alphas_[idx][static_cast<std::size_t>(i)];
      fact *= factorial_of(alphas_[idx][static_cast<std::size_t>(i)]);
    }
    lookup_[key] = static_cast<std::int32_t>(idx);
    factorial_[idx] = fact;
    multiplicity_[idx] = factorial_of(total_order(alphas_[idx])) / fact;
  }

  for (int axis = 0; axis < dim_; ++axis) {
    auto& r = raise_[static_cast<std::size_t>(axis)];
    r.resize(alphas_.size());
    for (std::size_t idx = 0; idx < alphas_.size(); ++idx) {
      MultiIndex up = alphas_[idx];
      if (total_order(up) >= max_order_) {
        r[idx] = -1;
        continue;
      }
      up[static_cast<std::size_t>(axis)]++;
      r[idx] = static_cast<std::ptrdiff_t>(index(up));
    }
  }

  for (std::size_t a = 0; a < alphas_.size(); ++a) {
    for (std::size_t b = 0; b < alphas_.size(); ++b) {
      if (total_order(alphas_[a]) + total_order(alphas_[b]) > max_order_) continue;
      MultiIndex sum{};
      for (int i = 0; i < dim_; ++i) {
        sum[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
            alphas_[a][static_cast<std::size_t>(i)] + alphas_[b][static_cast<std::size_t>(i)]);
      }
      triples_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(index(sum))});
    }
  }
  std::stable_sort(triples_.begin(), triples_.end(),
                   [](const Triple& x, const Triple& y) { return x.out < y.out; });
  triple_count_upto_.resize(static_cast<std::size_t>(max_order_) + 1);
  for (int m = 0; m <= max_order_; ++m) {
    const auto limit = size_upto_[static_cast<std::size_t>(m)];
    triple_count_upto_[static_cast<std::size_t>(m)] = static_cast<std::size_t>(
        std::partition_point(triples_.begin(), triples_.end(),
                             [limit](const Triple& t) { return t.out < limit; }) -
        triples_.begin());
  }
}

const JetSpace& JetSpace::get(int dim) {
  if (dim < 1 || dim > kMaxDim) throw CapabilityError("jet dimension must be in 1.." + std::to_string(kMaxDim));
  static std::array<std::unique_ptr<JetSpace>, kMaxDim> spaces;
  static std::array<std::once_flag, kMaxDim> flags;
  const auto slot = static_cast<std::size_t>(dim - 1);
  std::call_once(flags[slot], [&] { spaces[slot].reset(new JetSpace(dim)); });
  return *spaces[slot];
}

std::size_t JetSpace::index(const MultiIndex& alpha) const {
  std::size_t key = 0;
  for (int i = dim_ - 1; i >= 0; --i) {
    const auto a = alpha[static_cast<std::size_t>(i)];
    if (a > max_order_) throw CapabilityError("multi-index exceeds the jet order cap");
    key = key * static_cast<std::size_t>(max_order_ + 1) + a;
  }
  for (int i = dim_; i < kMaxDim; ++i) {
    if (alpha[static_cast<std::size_t>(i)] != 0) throw DomainError("multi-index has entries beyond the dimension");
  }
  const auto found = lookup_[key];
  if (found < 0) throw CapabilityError("multi-index exceeds the jet order cap");
  return static_cast<std::size_t>(found);
}

Jet::Jet(int dim, int order) : dim_(dim), order_(order) {
  if (order < 0 || order > kMaxJetOrder) {
    throw CapabilityError("jet order " + std::to_string(order) + " exceeds the engine cap " +
                          std::to_string(kMaxJetOrder));
  }
  coeffs_.assign(JetSpace::get(dim).size(order), 0.0);
}

Jet Jet::constant(int dim, int order, double value) {
  Jet j(dim, order);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(int dim, int order, int axis, double x0) {
  Jet j = constant(dim, order, x0);
  if (order >= 1) j.coeffs_[1 + static_cast<std::size_t>(axis)] = 1.0;
  return j;
}

double Jet::derivative(const MultiIndex& alpha) const {
  const auto idx = space().index(alpha);
  if (idx >= coeffs_.size()) throw CapabilityError("derivative order exceeds the jet order");
  return derivative_at(idx);
}

double Jet::derivative_at(std::size_t idx) const { return coeffs_[idx] * space().factorial(idx); }

Jet Jet::truncated(int order) const {
  if (order >= order_) return *this;
  Jet j;
  j.dim_ = dim_;
  j.order_ = order;
  j.coeffs_.assign(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(space().size(order)));
  return j;
}

bool Jet::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
}

Jet& Jet::operator+=(const Jet& other) {
  if (other.order_ < order_) *this = truncated(other.order_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  if (other.order_ < order_) *this = truncated(other.order_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

void multiply_accumulate(Jet& out, const Jet& a, const Jet& b) {
  assert(a.order() >= out.order() && b.order() >= out.order());
  const auto& sp = out.space();
  const double* pa = a.coeffs().data();
  const double* pb = b.coeffs().data();
  for (const auto& t : sp.product_table(out.order())) out.coeff(t.out) += pa[t.a] * pb[t.b];
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet out(a.dim(), std::min(a.order(), b.order()));
  multiply_accumulate(out, a, b);
  return out;
}

Jet compose(const Jet& x, std::span<const double> derivs) {
  const int m = x.order();
  // Horner in h = x - x0, which is nilpotent of degree m + 1.
  Jet h = x;
  h.coeff(0) = 0.0;
  double inv_fact = 1.0;
  DerivBuffer taylor(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    if (k > 0) inv_fact /= k;
    taylor[static_cast<std::size_t>(k)] = derivs[static_cast<std::size_t>(k)] * inv_fact;
  }
  Jet acc = Jet::constant(x.dim(), m, taylor[static_cast<std::size_t>(m)]);
  for (int k = m - 1; k >= 0; --k) {
    Jet next = Jet::constant(x.dim(), m, taylor[static_cast<std::size_t>(k)]);
    multiply_accumulate(next, acc, h);
    acc = std::move(next);
  }
  return acc;
}

Jet exp(const Jet& x) {
  DerivBuffer d(static_cast<std::size_t>(x.order()) + 1, std::exp(x.value()));
  return compose(x, {d.data(), d.size()});
}

Jet sin(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  DerivBuffer d(static_cast<std::size_t>(x.order()) + 1);
  const double cycle[4] = {s, c, -s, -c};
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
  return compose(x, {d.data(), d.size()});
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  DerivBuffer d(static_cast<std::size_t>(x.order()) + 1);
  const double cycle[4] = {c, -s, -c, s};
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
  return compose(x, {d.data(), d.size()});
}

Jet log(const Jet& x) {
  const double x0 = x.value();
  if (!(x0 > 0.0)) throw DomainError("log of a nonpositive value");
  DerivBuffer d(static_cast<std::size_t>(x.order()) + 1);
  d[0] = std::log(x0);
  double term = 1.0 / x0;  // (-1)^(k-1) (k-1)! / x0^k
  for (std::size_t k = 1; k < d.size(); ++k) {
    d[k] = term;
    term *= -static_cast<double>(k) / x0;
  }
  return compose(x, {d.data(), d.size()});
}

Jet sqrt(const Jet& x) {
  const double x0 = x.value();
  if (x0 < 0.0 || (x0 == 0.0 && x.order() > 0)) throw DomainError("sqrt outside its smooth domain");
  DerivBuffer d(static_cast<std::size_t>(x.order()) + 1);
  double term = std::sqrt(x0);
  double power = 0.5;
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] = term;
    term *= power / x0;
    power -= 1.0;
  }
  return compose(x, {d.data(), d.size()});
}

Jet reciprocal(const Jet& x) {
  const double x0 = x.value();
  if (x0 == 0.0) throw DomainError("reciprocal of zero");
  DerivBuffer d(static_cast<std::size_t>(x.order()) + 1);
  double term = 1.0 / x0;  // (-1)^k k! / x0^(k+1)
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] = term;
    term *= -static_cast<double>(k + 1) / x0;
  }
  return compose(x, {d.data(), d.size()});
}

Jet pow(const Jet& x, int n) {
  if (n < 0) return pow(reciprocal(x), -n);
  Jet result = Jet::constant(x.dim(), x.order(), 1.0);
  Jet base = x;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

Jet partial(const Jet& x, int axis) {
  if (x.order() == 0) throw CapabilityError("cannot differentiate an order-0 jet");
  if (axis < 0 || axis >= x.dim()) throw DomainError("partial derivative axis out of range");
  const auto& sp = x.space();
  Jet out(x.dim(), x.order() - 1);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const auto up = static_cast<std::size_t>(sp.raise(axis, idx));
    out.coeff(idx) = static_cast<double>(sp.alpha(idx)[static_cast<std::size_t>(axis)] + 1) * x.coeff(up);
  }
  return out;
}

}  // namespace statphase
