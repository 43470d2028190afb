#pragma once

// Composable expression nodes for phases and symbols.
//
// Supported grammar: constants, coordinates, named parameters, +, -, *, integer powers, sin, cos,
// exp, log, sqrt, 1/x, and two guarded primitives with exact flat regions:
//   bump(s)      = exp(1 - 1/(1 - s)) for s < 1, else 0
//   polybump(s)  = (1 - s)^m         for s < 1, else 0
//   smoothstep(u)= f(u) / (f(u) + f(1 - u)), f(t) = exp(-1/t) for t > 0, else 0
// An Expr is compiled into a Tape, which evaluates values or full jets at a point.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "statphase/jet.hpp"

namespace statphase {

namespace detail {
struct Node;
}

class Expr {
 public:
  Expr(double c);  // NOLINT(google-explicit-constructor): constants read naturally in formulas
  static Expr coord(int axis);
  static Expr param(std::string name);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  friend Expr pow(const Expr& a, int n);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr reciprocal(const Expr& a);
  friend Expr bump(const Expr& s);
  friend Expr polybump(const Expr& s, int power);
  friend Expr smoothstep(const Expr& u);

  const std::shared_ptr<const detail::Node>& node() const { return node_; }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::Node> node_;
};

/// Named real parameters. Scalars are stored as length-1 vectors, matrices row-major.
using ParameterMap = std::map<std::string, std::vector<double>>;

/// Linearized expression, evaluated register by register.
class Tape {
 public:
  Tape() = default;
  /// Compiles `e` for `dim` coordinates; parameters are bound to the given values.
  Tape(const Expr& e, int dim, const ParameterMap& params = {});

  int dim() const { return dim_; }
  std::size_t size() const { return ops_.size(); }

  double value(std::span<const double> x) const;
  Jet jet(std::span<const double> x, int order) const;

  enum class Op { Const, Coord, Add, Sub, Mul, Neg, Pow, Sin, Cos, Exp, Log, Sqrt, Inv, Bump, PolyBump, Step };

  struct Instr {
    Op op;
    int a = -1;
    int b = -1;
    int k = 0;
    double c = 0.0;
  };

 private:
  int dim_ = 0;
  std::vector<Instr> ops_;
};

namespace scalar_fn {
double bump(double s);
double polybump(double s, int power);
double smoothstep(double u);
}  // namespace scalar_fn

/// Jet versions of the guarded primitives (exactly zero/constant jets on their flat regions).
Jet bump(const Jet& s);
Jet polybump(const Jet& s, int power);
Jet smoothstep(const Jet& u);

}  // namespace statphase
