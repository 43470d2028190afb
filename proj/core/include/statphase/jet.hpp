#pragma once

// Truncated multivariate Taylor polynomials ("jets").
//
// A jet of order m at a point x0 stores the Taylor coefficients f_alpha = D^alpha f(x0) / alpha!
// for every multi-index |alpha| <= m. Arithmetic on jets is exact up to truncation, so a field
// built from jet operations yields every partial derivative up to order m to machine precision.
// Coefficients are laid out in graded order (all |alpha| = 0, then 1, ...), which makes a jet of
// lower order a prefix of a higher-order one.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace statphase {

inline constexpr int kMaxDim = 5;
inline constexpr int kMaxJetOrder = 8;

using MultiIndex = std::array<std::uint8_t, kMaxDim>;

/// Sum of the entries of alpha.
int total_order(const MultiIndex& alpha);

/// Tables shared by all jets of a given dimension.
class JetSpace {
 public:
  /// Process-wide space for `dim` variables. Thread-safe.
  static const JetSpace& get(int dim);

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }

  /// Number of multi-indices with |alpha| <= order.
  std::size_t size(int order) const { return size_upto_[static_cast<std::size_t>(order)]; }

  const MultiIndex& alpha(std::size_t idx) const { return alphas_[idx]; }
  std::size_t index(const MultiIndex& alpha) const;

  /// alpha! for the multi-index at idx.
  double factorial(std::size_t idx) const { return factorial_[idx]; }
  /// |alpha|! / alpha!: how many ordered index tuples share this multi-index.
  double multiplicity(std::size_t idx) const { return multiplicity_[idx]; }
  /// Index of alpha + e_axis, or -1 when it exceeds the order cap.
  std::ptrdiff_t raise(int axis, std::size_t idx) const {
    return raise_[static_cast<std::size_t>(axis)][idx];
  }

  struct Triple {
    std::uint32_t a, b, out;
  };
  /// Product table entries whose output index lies within `order`, sorted by output index.
  std::span<const Triple> product_table(int order) const {
    return {triples_.data(), triple_count_upto_[static_cast<std::size_t>(order)]};
  }

 private:
  explicit JetSpace(int dim);

  int dim_;
  int max_order_;
  std::vector<MultiIndex> alphas_;
  std::vector<std::size_t> size_upto_;
  std::vector<std::int32_t> lookup_;
  std::vector<double> factorial_;
  std::vector<double> multiplicity_;
  std::array<std::vector<std::ptrdiff_t>, kMaxDim> raise_;
  std::vector<Triple> triples_;
  std::vector<std::size_t> triple_count_upto_;
};

class Jet {
 public:
  using Storage = boost::container::small_vector<double, 20>;

  Jet() = default;
  /// Zero jet.
  Jet(int dim, int order);

  static Jet constant(int dim, int order, double value);
  /// The coordinate function x_axis expanded at x0.
  static Jet variable(int dim, int order, int axis, double x0);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return coeffs_.size(); }
  const JetSpace& space() const { return JetSpace::get(dim_); }

  double value() const { return coeffs_[0]; }
  double coeff(std::size_t idx) const { return coeffs_[idx]; }
  double& coeff(std::size_t idx) { return coeffs_[idx]; }
  std::span<const double> coeffs() const { return {coeffs_.data(), coeffs_.size()}; }

  /// D^alpha f(x0) = alpha! * coefficient.
  double derivative(const MultiIndex& alpha) const;
  double derivative_at(std::size_t idx) const;

  /// Same expansion with terms above `order` dropped.
  Jet truncated(int order) const;
  /// True when every coefficient is exactly zero.
  bool is_zero() const;

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(double s, Jet a) {
    a *= -1.0;
    return a += s;
  }
  friend Jet operator*(const Jet& a, const Jet& b);

 private:
  int dim_ = 1;
  int order_ = 0;
  Storage coeffs_;
};

/// out += a * b, truncated to out's order (out must not alias a or b).
void multiply_accumulate(Jet& out, const Jet& a, const Jet& b);

/// f(x) given f^(k)(x.value()) for k = 0..x.order() in `derivs`.
Jet compose(const Jet& x, std::span<const double> derivs);

Jet exp(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet log(const Jet& x);
Jet sqrt(const Jet& x);
Jet reciprocal(const Jet& x);
Jet pow(const Jet& x, int n);

/// Partial derivative along `axis`; the result has order one less than x.
Jet partial(const Jet& x, int axis);

}  // namespace statphase
