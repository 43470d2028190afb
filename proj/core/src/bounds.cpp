#include "statphase/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "statphase/errors.hpp"
#include "statphase/families.hpp"

namespace statphase {

std::string to_string(BoundVariant v) { return v == BoundVariant::thm1 ? "thm1" : "thm2"; }

double BoundFormula::prefactor() const {
  if (!(a0 > 0.0)) throw HypothesisError("bound formula needs a0 > 0");
  const double dd = d;
  if (variant == BoundVariant::thm1) {
    return C * std::pow(a0, -(1.0 + dd)) * (1.0 + std::pow(M, dd / 2.0 + dd * dd)) * N;
  }
  return C / a0 * (1.0 + std::pow(M, dd / 2.0)) * N;
}

double BoundFormula::operator()(double lambda) const { return prefactor() * std::pow(lambda, -0.5 * d); }

BoundFormula BoundFormula::from_report(const HypothesisReport& report, BoundVariant variant, double C) {
  BoundFormula f;
  f.variant = variant;
  f.d = report.dim;
  f.a0 = report.a0;
  f.M = report.M.at(static_cast<std::size_t>(report.dim + 2));
  f.N = report.N.at(static_cast<std::size_t>(report.dim + 1));
  f.C = C;
  return f;
}

double calibrate_constant(const BoundFormula& formula, double measured, double lambda) {
  BoundFormula unit = formula;
  unit.C = 1.0;
  return measured / unit(lambda);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y, double residual_threshold) {
  if (x.size() != y.size()) throw ValidationError("fit_line: size mismatch");
  LinearFit f;
  f.points = x.size();
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  f.defined = x.size() >= 3 && f.residual < residual_threshold;
  return f;
}

std::vector<double> geometric_grid(double start, double stop, int count) {
  if (!(start > 0.0) || !(stop >= start) || count < 1) throw ValidationError("bad geometric grid");
  if (count == 1) return {start};
  std::vector<double> g(static_cast<std::size_t>(count));
  const double ratio = stop / start;
  for (int i = 0; i < count; ++i) {
    g[static_cast<std::size_t>(i)] = start * std::pow(ratio, static_cast<double>(i) / (count - 1));
  }
  g.front() = start;
  g.back() = stop;
  return g;
}

DecaySweepResult decay_sweep(const PhaseModel& phase, const SymbolModel& symbol, const std::vector<double>& lambdas,
                             const SweepOptions& options) {
  for (double l : lambdas) {
    if (!(l >= 1.0)) throw ValidationError("decay sweep needs lambda >= 1");
  }
  const int d = phase.dim();
  DecaySweepResult r;
  r.d = d;
  r.method = options.method;
  std::optional<PartitionOfUnity> partition;
  if (options.method == IntegralMethod::decomposition) {
    if (!options.delta) throw ValidationError("the multi-ball decomposition needs a lattice spacing delta");
    partition = PartitionOfUnity::lattice(symbol.support(), *options.delta);
  } else if (options.method == IntegralMethod::decomposition_single_ball) {
    partition = PartitionOfUnity::single_ball(symbol.support());
  }
  DecompositionOptions dopt = options.decomposition;
  dopt.quadrature = options.quadrature;

  double mass = 0.0;
  for (double lambda : lambdas) {
    SweepPoint p;
    p.lambda = lambda;
    try {
      const auto res = partition ? decomposition_integral(phase, symbol, lambda, *partition, dopt)
                                 : oracle_integral(phase, symbol, lambda, options.quadrature);
      p.abs_value = std::abs(res.value);
      p.error_estimate = res.error_estimate;
      mass = std::max(mass, res.symbol_mass);
    } catch (const AccuracyError& e) {
      p.abs_value = std::abs(e.best_value);
      p.error_estimate = e.last_delta;
      p.accurate = false;
    }
    r.points.push_back(p);
  }
  for (auto& p : r.points) p.resolved = p.abs_value > options.noise_floor * mass;

  const auto n = r.points.size();
  const auto first = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - options.tail_fraction)));
  std::vector<double> x, y;
  for (std::size_t i = std::min(first, n); i < n; ++i) {
    const auto& p = r.points[i];
    if (!p.accurate || !p.resolved) continue;
    x.push_back(std::log(p.lambda));
    y.push_back(std::log(p.abs_value));
  }
  r.fit_lambda_min = first < n ? r.points[first].lambda : 0.0;
  r.fit = fit_line(x, y, options.residual_threshold);
  for (const auto& p : r.points) {
    if (p.accurate) r.plateau = std::max(r.plateau, p.abs_value * std::pow(p.lambda, 0.5 * d));
  }
  return r;
}

RescalingReport rescaling_check(const PhaseModel& phase, const SymbolModel& symbol, double lambda, double t,
                                const RescalingOptions& options) {
  if (!(t > 0.0)) throw ValidationError("t must be positive");
  const int d = phase.dim();
  RescalingReport r;
  r.lambda = lambda;
  r.t = t;
  const PhaseModel scaled = phase.scaled(1.0 / t);
  r.original = oracle_integral(phase, symbol, lambda, options.quadrature).value;
  r.rescaled = oracle_integral(scaled, symbol, t * lambda, options.quadrature).value;
  r.discrepancy = std::abs(r.original - r.rescaled) / std::abs(r.original);

  const Box& V = phase.domain();
  const int pts = options.grid_points > 0 ? options.grid_points : default_audit_points(d);
  double w = 0.0;
  for (int i = 0; i < d; ++i) w = std::max(w, V.width(i));
  const double step = w / (pts - 1);
  const auto M = compute_M(phase, V, d + 2, step, options.threads);
  const auto Ms = compute_M(scaled, V, d + 2, step, options.threads);
  for (std::size_t k = 2; k < M.size(); ++k) {
    const double want = M[k] / t;
    if (want != 0.0) r.M_relative_error = std::max(r.M_relative_error, std::abs(Ms[k] - want) / want);
  }
  const double a0 = compute_a0(phase, V, step, 0.0, options.threads).a0;
  const double a0s = compute_a0(scaled, V, step, 0.0, options.threads).a0;
  const double a0_want = a0 / std::pow(t, d);
  if (a0_want > 0.0) r.a0_relative_error = std::abs(a0s - a0_want) / a0_want;

  if (a0 > 0.0) {
    const double dd = d;
    const double ap = a0 / std::pow(t, dd), lp = t * lambda;
    const double lhs1 = std::pow(ap, -(1.0 + dd)) * std::pow(lp, -dd / 2.0);
    const double rhs1 = std::pow(t, dd / 2.0 + dd * dd) * std::pow(a0, -(1.0 + dd)) * std::pow(lambda, -dd / 2.0);
    const double lhs2 = std::pow(lp, -dd / 2.0) / ap;
    const double rhs2 = std::pow(t, dd / 2.0) / a0 * std::pow(lambda, -dd / 2.0);
    r.thm1_algebra_error = std::abs(lhs1 - rhs1) / rhs1;
    r.thm2_algebra_error = std::abs(lhs2 - rhs2) / rhs2;
  }
  return r;
}

DispersiveResult dispersive_experiment(const SymbolModel& symbol, const Box& V, const std::vector<double>& ts,
                                       double lambda, const DispersiveOptions& options) {
  const int d = V.dim();
  DispersiveResult r;
  r.lambda = lambda;
  const Point zero(static_cast<std::size_t>(d), 0.0);
  const Point& x = options.x.empty() ? zero : options.x;
  const Point& y = options.y.empty() ? zero : options.y;
  for (double t : ts) {
    if (!(t > 0.0)) throw ValidationError("dispersive t must be positive");
    const auto phase = builtin_phase({"dispersive", {{"t", {t}}, {"x", x}, {"y", y}}, {{"theta", options.theta}}}, V);
    DispersivePoint p;
    p.t = t;
    p.abs_value = std::abs(oracle_integral(phase, symbol, lambda, options.quadrature).value);
    p.in_regime = t * lambda >= 1.0;
    r.points.push_back(p);
  }
  std::vector<double> lx, ly;
  for (const auto& p : r.points) {
    if (!p.in_regime) continue;
    r.envelope_constant = std::max(r.envelope_constant, p.abs_value * std::pow(p.t * lambda, 0.5 * d));
    if (p.t * lambda >= options.fit_t_min_factor) {
      lx.push_back(std::log(p.t));
      ly.push_back(std::log(p.abs_value));
    }
  }
  for (auto& p : r.points) p.envelope = r.envelope_constant * std::pow(p.t * lambda, -0.5 * d);
  r.fit = fit_line(lx, ly, options.residual_threshold);
  return r;
}

BoundRatioReport bound_ratio_report(const DecaySweepResult& sweep, const BoundFormula& formula) {
  BoundRatioReport r;
  r.formula = formula;
  const double pre = formula.prefactor();
  for (const auto& p : sweep.points) {
    if (!p.accurate) continue;
    const double s = p.abs_value * std::pow(p.lambda, 0.5 * sweep.d);
    r.lambda.push_back(p.lambda);
    r.scaled.push_back(s);
    r.ratio.push_back(s / pre);
    r.plateau = std::max(r.plateau, s);
    r.max_ratio = std::max(r.max_ratio, s / pre);
  }
  r.exceeds = r.max_ratio > 1.0;
  return r;
}

CsvTable sweep_csv(const DecaySweepResult& sweep, const std::optional<BoundFormula>& formula) {
  CsvTable t({"lambda", "abs", "scaled", "bound", "ratio", "accurate", "resolved"});
  for (const auto& p : sweep.points) {
    const double s = p.abs_value * std::pow(p.lambda, 0.5 * sweep.d);
    std::string bound, ratio;
    if (formula) {
      bound = format_double((*formula)(p.lambda));
      ratio = format_double(s / formula->prefactor());
    }
    t.add_row({format_double(p.lambda), format_double(p.abs_value), format_double(s), bound, ratio,
               p.accurate ? "1" : "0", p.resolved ? "1" : "0"});
  }
  return t;
}

CsvTable fit_csv(const LinearFit& fit) {
  CsvTable t({"slope", "intercept", "residual", "points", "defined"});
  t.add_row({format_double(fit.slope), format_double(fit.intercept), format_double(fit.residual),
             std::to_string(fit.points), fit.defined ? "1" : "0"});
  return t;
}

CsvTable dispersive_csv(const DispersiveResult& r) {
  CsvTable t({"t", "lambda", "abs", "envelope", "in_regime"});
  for (const auto& p : r.points) {
    t.add_row({format_double(p.t), format_double(r.lambda), format_double(p.abs_value), format_double(p.envelope),
               p.in_regime ? "1" : "0"});
  }
  return t;
}

CsvTable rescaling_csv(const std::vector<RescalingReport>& reports) {
  CsvTable t({"lambda", "t", "re_original", "im_original", "re_rescaled", "im_rescaled", "discrepancy",
              "M_relative_error", "a0_relative_error", "thm1_algebra_error", "thm2_algebra_error"});
  for (const auto& r : reports) {
    t.add_row({format_double(r.lambda), format_double(r.t), format_double(r.original.real()),
               format_double(r.original.imag()), format_double(r.rescaled.real()), format_double(r.rescaled.imag()),
               format_double(r.discrepancy), format_double(r.M_relative_error), format_double(r.a0_relative_error),
               format_double(r.thm1_algebra_error), format_double(r.thm2_algebra_error)});
  }
  return t;
}

}  // namespace statphase
