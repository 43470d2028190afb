#include "statphase/expr.hpp"

#include <cmath>
#include <unordered_map>

#include "statphase/errors.hpp"

namespace statphase {

namespace detail {

struct Node {
  Tape::Op op;
  double value = 0.0;
  int k = 0;
  std::string name;
  std::shared_ptr<const Node> a, b;
};

}  // namespace detail

namespace {

using detail::Node;
using Op = Tape::Op;

std::shared_ptr<const Node> make(Op op, std::shared_ptr<const Node> a = {}, std::shared_ptr<const Node> b = {},
                                 int k = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->k = k;
  return n;
}

}  // namespace

Expr::Expr(double c) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = c;
  node_ = std::move(n);
}

Expr Expr::coord(int axis) {
  if (axis < 0 || axis >= kMaxDim) throw ValidationError("coordinate axis out of range");
  return Expr(make(Op::Coord, {}, {}, axis));
}

Expr Expr::param(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(make(Op::Add, a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make(Op::Sub, a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make(Op::Mul, a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(make(Op::Neg, a.node_)); }
Expr pow(const Expr& a, int n) { return Expr(make(Op::Pow, a.node_, {}, n)); }
Expr sin(const Expr& a) { return Expr(make(Op::Sin, a.node_)); }
Expr cos(const Expr& a) { return Expr(make(Op::Cos, a.node_)); }
Expr exp(const Expr& a) { return Expr(make(Op::Exp, a.node_)); }
Expr log(const Expr& a) { return Expr(make(Op::Log, a.node_)); }
Expr sqrt(const Expr& a) { return Expr(make(Op::Sqrt, a.node_)); }
Expr reciprocal(const Expr& a) { return Expr(make(Op::Inv, a.node_)); }
Expr bump(const Expr& s) { return Expr(make(Op::Bump, s.node_)); }
Expr polybump(const Expr& s, int power) {
  if (power < 1) throw ValidationError("polybump power must be >= 1");
  return Expr(make(Op::PolyBump, s.node_, {}, power));
}
Expr smoothstep(const Expr& u) { return Expr(make(Op::Step, u.node_)); }

namespace scalar_fn {

double bump(double s) { return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0; }

double polybump(double s, int power) { return s < 1.0 ? std::pow(1.0 - s, power) : 0.0; }

double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double f0 = std::exp(-1.0 / u);
  const double f1 = std::exp(-1.0 / (1.0 - u));
  return f0 / (f0 + f1);
}

}  // namespace scalar_fn

namespace {

// exp(c - 1/t) for t > 0, flushed to an exact zero jet once the value underflows; the Taylor
// coefficients of 1/t would otherwise overflow and poison the product with 0 * inf.
Jet exp_neg_reciprocal(const Jet& t, double c) {
  if (c - 1.0 / t.value() < -745.0) return Jet(t.dim(), t.order());
  return exp(c - reciprocal(t));
}

}  // namespace

Jet bump(const Jet& s) {
  if (!(s.value() < 1.0)) return Jet(s.dim(), s.order());
  return exp_neg_reciprocal(1.0 - s, 1.0);
}

Jet polybump(const Jet& s, int power) {
  if (!(s.value() < 1.0)) return Jet(s.dim(), s.order());
  return pow(1.0 - s, power);
}

Jet smoothstep(const Jet& u) {
  if (u.value() <= 0.0) return Jet(u.dim(), u.order());
  if (u.value() >= 1.0) return Jet::constant(u.dim(), u.order(), 1.0);
  const Jet f0 = exp_neg_reciprocal(u, 0.0);
  const Jet f1 = exp_neg_reciprocal(1.0 - u, 0.0);
  if (f1.is_zero()) return Jet::constant(u.dim(), u.order(), 1.0);
  return f0 * reciprocal(f0 + f1);
}

Tape::Tape(const Expr& e, int dim, const ParameterMap& params) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw ValidationError("dimension must be in 1.." + std::to_string(kMaxDim));
  std::unordered_map<const Node*, int> seen;
  // Iterative post-order walk; shared subexpressions are emitted once.
  auto emit = [&](auto&& self, const std::shared_ptr<const Node>& n) -> int {
    if (auto it = seen.find(n.get()); it != seen.end()) return it->second;
    Instr ins{n->op};
    ins.k = n->k;
    ins.c = n->value;
    if (n->op == Op::Const && !n->name.empty()) {
      auto p = params.find(n->name);
      if (p == params.end() || p->second.size() != 1) {
        throw ValidationError("unbound scalar parameter '" + n->name + "'");
      }
      ins.c = p->second[0];
    }
    if (n->op == Op::Coord && n->k >= dim_) throw ValidationError("coordinate index exceeds the dimension");
    if (n->a) ins.a = self(self, n->a);
    if (n->b) ins.b = self(self, n->b);
    ops_.push_back(ins);
    const int id = static_cast<int>(ops_.size()) - 1;
    seen.emplace(n.get(), id);
    return id;
  };
  emit(emit, e.node());
}

double Tape::value(std::span<const double> x) const {
  thread_local std::vector<double> regs;
  regs.resize(ops_.size());
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const auto& in = ops_[i];
    const double a = in.a >= 0 ? regs[static_cast<std::size_t>(in.a)] : 0.0;
    const double b = in.b >= 0 ? regs[static_cast<std::size_t>(in.b)] : 0.0;
    double r = 0.0;
    switch (in.op) {
      case Op::Const: r = in.c; break;
      case Op::Coord: r = x[static_cast<std::size_t>(in.k)]; break;
      case Op::Add: r = a + b; break;
      case Op::Sub: r = a - b; break;
      case Op::Mul: r = a * b; break;
      case Op::Neg: r = -a; break;
      case Op::Pow: r = std::pow(a, in.k); break;
      case Op::Sin: r = std::sin(a); break;
      case Op::Cos: r = std::cos(a); break;
      case Op::Exp: r = std::exp(a); break;
      case Op::Log:
        if (!(a > 0.0)) throw DomainError("log of a nonpositive value");
        r = std::log(a);
        break;
      case Op::Sqrt:
        if (a < 0.0) throw DomainError("sqrt of a negative value");
        r = std::sqrt(a);
        break;
      case Op::Inv:
        if (a == 0.0) throw DomainError("reciprocal of zero");
        r = 1.0 / a;
        break;
      case Op::Bump: r = scalar_fn::bump(a); break;
      case Op::PolyBump: r = scalar_fn::polybump(a, in.k); break;
      case Op::Step: r = scalar_fn::smoothstep(a); break;
    }
    regs[i] = r;
  }
  return regs.back();
}

Jet Tape::jet(std::span<const double> x, int order) const {
  std::vector<Jet> regs;
  regs.reserve(ops_.size());
  for (const auto& in : ops_) {
    const Jet* a = in.a >= 0 ? &regs[static_cast<std::size_t>(in.a)] : nullptr;
    const Jet* b = in.b >= 0 ? &regs[static_cast<std::size_t>(in.b)] : nullptr;
    switch (in.op) {
      case Op::Const: regs.push_back(Jet::constant(dim_, order, in.c)); break;
      case Op::Coord: regs.push_back(Jet::variable(dim_, order, in.k, x[static_cast<std::size_t>(in.k)])); break;
      case Op::Add: regs.push_back(*a + *b); break;
      case Op::Sub: regs.push_back(*a - *b); break;
      case Op::Mul: regs.push_back(*a * *b); break;
      case Op::Neg: regs.push_back(-*a); break;
      case Op::Pow: regs.push_back(pow(*a, in.k)); break;
      case Op::Sin: regs.push_back(sin(*a)); break;
      case Op::Cos: regs.push_back(cos(*a)); break;
      case Op::Exp: regs.push_back(exp(*a)); break;
      case Op::Log: regs.push_back(log(*a)); break;
      case Op::Sqrt: regs.push_back(sqrt(*a)); break;
      case Op::Inv: regs.push_back(reciprocal(*a)); break;
      case Op::Bump: regs.push_back(bump(*a)); break;
      case Op::PolyBump: regs.push_back(polybump(*a, in.k)); break;
      case Op::Step: regs.push_back(smoothstep(*a)); break;
    }
  }
  return std::move(regs.back());
}

}  // namespace statphase
