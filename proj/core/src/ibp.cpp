#include "statphase/ibp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "statphase/errors.hpp"

namespace statphase {

namespace {

// f(t) = exp(-1/t^2) for t > 0, flushed to zero once it underflows.
Jet exp_inverse_square(const Jet& t) {
  const double t0 = t.value();
  if (!(t0 > 0.0) || 1.0 / (t0 * t0) > 745.0) return Jet(t.dim(), t.order());
  const Jet inv = reciprocal(t);
  return exp(-(inv * inv));
}

}  // namespace

double Cutoff::operator()(double x) const {
  const double ax = std::abs(x);
  if (ax <= 1.0) return 1.0;
  if (ax >= 2.0) return 0.0;
  if (profile_ == CutoffProfile::exp_inverse) return scalar_fn::smoothstep(2.0 - ax);
  auto f = [](double t) { return t > 0.0 ? std::exp(-1.0 / (t * t)) : 0.0; };
  const double f0 = f(2.0 - ax), f1 = f(ax - 1.0);
  return f0 / (f0 + f1);
}

Jet Cutoff::operator()(const Jet& r) const {
  if (r.value() < 0.0) return (*this)(-r);
  const double r0 = r.value();
  if (r0 <= 1.0) return Jet::constant(r.dim(), r.order(), 1.0);
  if (r0 >= 2.0) return Jet(r.dim(), r.order());
  if (profile_ == CutoffProfile::exp_inverse) return smoothstep(2.0 - r);
  const Jet f0 = exp_inverse_square(2.0 - r);
  const Jet f1 = exp_inverse_square(r - 1.0);
  if (f1.is_zero()) return Jet::constant(r.dim(), r.order(), 1.0);
  return f0 * reciprocal(f0 + f1);
}

double Cutoff::derivative(double x, int order) const {
  if (order < 0 || order > kMaxJetOrder) throw CapabilityError("cutoff derivative order out of range");
  if (order == 0) return (*this)(x);
  return (*this)(Jet::variable(1, order, 0, x)).derivative_at(static_cast<std::size_t>(order));
}

double cutoff(double x) { return Cutoff()(x); }
double cutoff_deriv(double x, int order) { return Cutoff().derivative(x, order); }

Jet gradient_norm_jet(const Jet& phi) {
  const int d = phi.dim();
  Jet s(d, phi.order() - 1);
  for (int i = 0; i < d; ++i) {
    const Jet g = partial(phi, i);
    multiply_accumulate(s, g, g);
  }
  if (!(s.value() > 0.0)) throw NearCriticalError("|grad Phi| vanishes");
  return sqrt(s);
}

Jet cutoff_of_gradient(const Jet& phi, double sqrt_lambda, const Cutoff& psi) {
  const int d = phi.dim();
  double g2 = 0.0;
  for (int i = 0; i < d; ++i) g2 += phi.coeff(static_cast<std::size_t>(1 + i)) * phi.coeff(static_cast<std::size_t>(1 + i));
  const double r0 = sqrt_lambda * std::sqrt(g2);
  if (r0 <= 1.0) return Jet::constant(d, phi.order() - 1, 1.0);
  if (r0 >= 2.0) return Jet(d, phi.order() - 1);
  return psi(sqrt_lambda * gradient_norm_jet(phi));
}

FieldA field_A(const Jet& phi, double floor) {
  if (phi.order() < 1) throw CapabilityError("field A needs a phase jet of order >= 1");
  const int d = phi.dim();
  FieldA f;
  std::vector<Jet> g;
  Jet s(d, phi.order() - 1);
  for (int i = 0; i < d; ++i) {
    g.push_back(partial(phi, i));
    multiply_accumulate(s, g.back(), g.back());
  }
  f.grad_norm = std::sqrt(s.value());
  if (!(f.grad_norm >= floor) || f.grad_norm == 0.0) {
    throw NearCriticalError("|grad Phi| = " + format_double(f.grad_norm) + " is below the critical-point floor");
  }
  const Jet inv = reciprocal(s);
  for (int i = 0; i < d; ++i) f.A.push_back(g[static_cast<std::size_t>(i)] * inv);
  if (phi.order() >= 2) {
    f.div = Jet(d, phi.order() - 2);
    for (int i = 0; i < d; ++i) f.div += partial(f.A[static_cast<std::size_t>(i)], i);
  }
  return f;
}

FieldA field_A(const PhaseModel& phase, std::span<const double> x, int order, double floor) {
  if (order + 1 > kMaxJetOrder) throw CapabilityError("field A order exceeds the engine cap");
  return field_A(phase.jet(x, order + 1), floor);
}

double IBPCoefficients::operator[](const MultiIndex& alpha) const {
  const auto idx = JetSpace::get(dim).index(alpha);
  if (idx >= c.size()) return 0.0;
  return c[idx];
}

std::vector<Jet> transpose_power_coeff_jets(const Jet& phi, int N, int extra, double floor) {
  if (N < 0 || extra < 0) throw ValidationError("N and extra must be nonnegative");
  if (phi.order() < N + 1 + extra) {
    throw CapabilityError("transpose coefficients need Phi to order N + 1 + extra");
  }
  const int d = phi.dim();
  const auto& sp = JetSpace::get(d);
  const Jet phi_t = phi.truncated(N + 1 + extra);
  const FieldA f = field_A(phi_t, floor);

  // c[idx] = c_{alpha,k} carried as a jet of order N - k + extra.
  std::vector<Jet> c{Jet::constant(d, N + extra, 1.0)};
  for (int k = 0; k < N; ++k) {
    const int ord = N - k - 1 + extra;
    std::vector<Jet> next(sp.size(k + 1), Jet(d, ord));
    for (std::size_t gi = 0; gi < sp.size(k + 1); ++gi) {
      const int g = total_order(sp.alpha(gi));
      Jet& out = next[gi];
      // (div A) c_{gamma,k} + A . grad c_{gamma,k}, present when |gamma| <= k.
      if (g <= k) {
        const Jet& cg = c[gi];
        multiply_accumulate(out, f.div, cg);
        for (int i = 0; i < d; ++i) multiply_accumulate(out, f.A[static_cast<std::size_t>(i)], partial(cg, i));
      }
      // A_i c_{alpha,k} with d^gamma = d_i d^alpha, present when |gamma| >= 1.
      if (g >= 1) {
        const auto& gamma = sp.alpha(gi);
        for (int i = 0; i < d; ++i) {
          if (gamma[static_cast<std::size_t>(i)] == 0) continue;
          MultiIndex alpha = gamma;
          alpha[static_cast<std::size_t>(i)]--;
          multiply_accumulate(out, f.A[static_cast<std::size_t>(i)], c[sp.index(alpha)]);
        }
      }
    }
    c = std::move(next);
  }
  return c;
}

IBPCoefficients transpose_power_coeffs(const PhaseModel& phase, std::span<const double> x, int N, double floor) {
  if (N < 1) throw ValidationError("N must be >= 1");
  if (N + 1 > kMaxJetOrder) throw CapabilityError("N exceeds the available smoothness");
  const auto jets = transpose_power_coeff_jets(phase.jet(x, N + 1), N, 0, floor);
  IBPCoefficients out;
  out.N = N;
  out.dim = phase.dim();
  out.point.assign(x.begin(), x.end());
  for (const auto& j : jets) out.c.push_back(j.value());
  return out;
}

double contract(std::span<const double> c, int N, const Jet& g) {
  if (g.order() < N) throw CapabilityError("amplitude jet order is below N");
  double s = 0.0;
  for (std::size_t idx = 0; idx < c.size(); ++idx) s += c[idx] * g.derivative_at(idx);
  return s;
}

double contract(const IBPCoefficients& c, const Jet& g) { return contract(c.c, c.N, g); }

double apply_transpose_power_real(const PhaseModel& phase, const Amplitude& g, int N, std::span<const double> x,
                                  double floor) {
  if (N < 0) throw ValidationError("N must be nonnegative");
  if (N + 1 > kMaxJetOrder) throw CapabilityError("N exceeds the available smoothness");
  const FieldA f = field_A(phase.jet(x, N + 1), floor);
  Jet h = g(x, N);
  for (int k = 0; k < N; ++k) {
    Jet next(phase.dim(), N - k - 1);
    for (int i = 0; i < phase.dim(); ++i) next += partial(f.A[static_cast<std::size_t>(i)] * h, i);
    h = std::move(next);
  }
  return h.value();
}

std::complex<double> apply_transpose_power(const PhaseModel& phase, const Amplitude& g, int N,
                                           std::span<const double> x, double lambda, double floor) {
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  const double v = apply_transpose_power_real(phase, g, N, x, floor);
  return std::pow(std::complex<double>(0.0, 1.0 / lambda), N) * v;
}

double apply_L_power(const PhaseModel& phase, const Amplitude& u, int N, std::span<const double> x, double floor) {
  if (N + 1 > kMaxJetOrder) throw CapabilityError("N exceeds the available smoothness");
  const FieldA f = field_A(phase.jet(x, N + 1), floor);
  Jet h = u(x, N);
  for (int k = 0; k < N; ++k) {
    Jet next(phase.dim(), N - k - 1);
    for (int i = 0; i < phase.dim(); ++i) multiply_accumulate(next, f.A[static_cast<std::size_t>(i)], partial(h, i));
    h = std::move(next);
  }
  return h.value();
}

LemmaBoundReport verify_coefficient_bounds(const PhaseModel& phase, const Box& region, int N, int samples,
                                           const LemmaBoundOptions& options) {
  if (N < 1) throw ValidationError("N must be >= 1");
  const int d = phase.dim();
  const int order = N + 1 + options.beta_max;
  if (order > kMaxJetOrder) throw CapabilityError("N + beta_max exceeds the engine cap");
  const auto& sp = JetSpace::get(d);
  LemmaBoundReport r;
  r.N = N;
  r.samples = samples;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point x(static_cast<std::size_t>(d));

  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = region.lo(i) + region.width(i) * u(rng);
    const Jet phi = phase.jet_unchecked(x, order);
    double g2 = 0.0;
    for (int i = 0; i < d; ++i) g2 += phi.coeff(static_cast<std::size_t>(1 + i)) * phi.coeff(static_cast<std::size_t>(1 + i));
    const double g = std::sqrt(g2);
    if (!(g > kDefaultGradientFloor) || g < options.grad_min || g > options.grad_max) continue;

    const FieldA f = field_A(phi.truncated(N + 1));
    for (std::size_t idx = sp.size(0); idx < sp.size(N); ++idx) {
      const int a = total_order(sp.alpha(idx));
      double denom = 0.0;
      for (int k = 2; k <= 1 + a; ++k) denom += std::pow(g, -k);
      for (const auto& Ai : f.A) r.ai_ratio = std::max(r.ai_ratio, std::abs(Ai.derivative_at(idx)) / denom);
    }
    ++r.ai_points;

    if (g <= 2.0) {
      const Jet gn = gradient_norm_jet(phi.truncated(N + 1));
      for (std::size_t idx = sp.size(0); idx < sp.size(N); ++idx) {
        const int a = total_order(sp.alpha(idx));
        r.nablaphi_ratio = std::max(r.nablaphi_ratio, std::abs(gn.derivative_at(idx)) / std::pow(g, 1 - a));
      }
      ++r.nablaphi_points;
    }

    const auto c = transpose_power_coeff_jets(phi, N, options.beta_max);
    for (std::size_t ai = 0; ai < c.size(); ++ai) {
      const int a = total_order(sp.alpha(ai));
      for (std::size_t bi = 0; bi < sp.size(options.beta_max); ++bi) {
        const int b = total_order(sp.alpha(bi));
        double denom = 0.0;
        for (int k = N; k <= 2 * N - a + b; ++k) denom += std::pow(g, -k);
        r.ltranspose_ratio = std::max(r.ltranspose_ratio, std::abs(c[ai].derivative_at(bi)) / denom);
      }
    }
    ++r.ltranspose_points;
  }
  return r;
}

CsvTable coefficient_csv(const std::vector<IBPCoefficients>& coeffs) {
  const int d = coeffs.empty() ? 1 : coeffs.front().dim;
  std::vector<std::string> header;
  for (int i = 0; i < d; ++i) header.push_back("x" + std::to_string(i + 1));
  for (int i = 0; i < d; ++i) header.push_back("alpha" + std::to_string(i + 1));
  header.emplace_back("N");
  header.emplace_back("value");
  CsvTable t(std::move(header));
  const auto& sp = JetSpace::get(d);
  for (const auto& c : coeffs) {
    for (std::size_t idx = 0; idx < c.c.size(); ++idx) {
      std::vector<std::string> row;
      for (double v : c.point) row.push_back(format_double(v));
      for (int i = 0; i < d; ++i) row.push_back(std::to_string(sp.alpha(idx)[static_cast<std::size_t>(i)]));
      row.push_back(std::to_string(c.N));
      row.push_back(format_double(c.c[idx]));
      t.add_row(std::move(row));
    }
  }
  return t;
}

}  // namespace statphase
