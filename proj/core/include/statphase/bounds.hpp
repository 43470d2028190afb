#pragma once

// Measured |I(lambda)| against the theorem right-hand sides:
//   thm1: C a0^-(1+d) (1 + M_{d+2}^(d/2 + d^2)) N_{d+1} lambda^(-d/2)
//   thm2: C a0^-1     (1 + M_{d+2}^(d/2))       N_{d+1} lambda^(-d/2)

#include <optional>
#include <string>
#include <vector>

#include "statphase/audit.hpp"
#include "statphase/csv.hpp"
#include "statphase/quadrature.hpp"

namespace statphase {

enum class BoundVariant { thm1, thm2 };
std::string to_string(BoundVariant v);

struct BoundFormula {
  BoundVariant variant = BoundVariant::thm1;
  int d = 1;
  double a0 = 1.0;
  double M = 0.0;  ///< M_{d+2}
  double N = 0.0;  ///< N_{d+1}
  double C = 1.0;

  /// Everything except lambda^(-d/2).
  double prefactor() const;
  double operator()(double lambda) const;
  /// Same inputs, taken from an audit report.
  static BoundFormula from_report(const HypothesisReport& report, BoundVariant variant, double C = 1.0);
};

/// C such that formula(lambda) equals `measured` (the formula's own C is ignored).
double calibrate_constant(const BoundFormula& formula, double measured, double lambda);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< RMS residual
  std::size_t points = 0;
  bool defined = false;
};

/// Least squares y = slope x + intercept; `defined` needs >= 3 points and residual < threshold.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y, double residual_threshold);

/// start, start r, ..., stop (count points).
std::vector<double> geometric_grid(double start, double stop, int count);

struct SweepPoint {
  double lambda = 0.0;
  double abs_value = 0.0;
  double error_estimate = 0.0;
  bool accurate = true;   ///< false when the quadrature hit its cap
  bool resolved = true;   ///< false when |I| sits at the quadrature noise floor
};

struct DecaySweepResult {
  int d = 1;
  IntegralMethod method = IntegralMethod::oracle;
  std::vector<SweepPoint> points;
  LinearFit fit;              ///< log|I| against log lambda over the tail
  double fit_lambda_min = 0.0;
  double plateau = 0.0;       ///< max |I| lambda^(d/2) over accurate points
};

struct SweepOptions {
  IntegralMethod method = IntegralMethod::oracle;
  QuadratureOptions quadrature;
  DecompositionOptions decomposition;  ///< used by the decomposition methods
  std::optional<double> delta;         ///< lattice spacing for IntegralMethod::decomposition
  double tail_fraction = 0.5;          ///< fit over the top part of the grid
  double residual_threshold = 0.05;
  double noise_floor = 1e-12;          ///< relative to int |b|
};

/// |I(lambda)| over the grid, with a log-log fit over the tail.
DecaySweepResult decay_sweep(const PhaseModel& phase, const SymbolModel& symbol, const std::vector<double>& lambdas,
                             const SweepOptions& options = {});

struct RescalingReport {
  double lambda = 0.0;
  double t = 1.0;
  std::complex<double> original, rescaled;
  double discrepancy = 0.0;       ///< |I(lambda, Phi) - I(t lambda, Phi / t)| / |I(lambda, Phi)|
  double M_relative_error = 0.0;  ///< max_k |M_k(Phi/t) - M_k(Phi)/t| / (M_k(Phi)/t)
  double a0_relative_error = 0.0; ///< |a0(Phi/t) - a0(Phi)/t^d| / (a0(Phi)/t^d)
  /// Relative error of a0'^-(1+d) lambda'^(-d/2) = t^(d/2+d^2) a0^-(1+d) lambda^(-d/2) (thm1) and of
  /// a0'^-1 lambda'^(-d/2) = t^(d/2) a0^-1 lambda^(-d/2) (thm2) at a0' = a0/t^d, lambda' = t lambda.
  double thm1_algebra_error = 0.0;
  double thm2_algebra_error = 0.0;
};

struct RescalingOptions {
  QuadratureOptions quadrature;
  int grid_points = 0;  ///< audit grid; 0 picks default_audit_points(d)
  int threads = 1;
};

RescalingReport rescaling_check(const PhaseModel& phase, const SymbolModel& symbol, double lambda, double t,
                                const RescalingOptions& options = {});

struct DispersivePoint {
  double t = 0.0;
  double abs_value = 0.0;
  double envelope = 0.0;
  bool in_regime = true;  ///< t >= 1 / lambda
};

struct DispersiveResult {
  double lambda = 0.0;
  std::vector<DispersivePoint> points;
  LinearFit fit;          ///< log|I| against log t
  double envelope_constant = 0.0;
};

struct DispersiveOptions {
  std::string theta = "quadratic";  ///< or klein_gordon
  Point x, y;                       ///< default: zero vectors
  QuadratureOptions quadrature;
  double fit_t_min_factor = 4.0;    ///< fit over t >= factor / lambda
  double residual_threshold = 0.05;
};

/// Phi_t = (x - y) . xi + t theta(xi): |I| against the envelope const (t lambda)^(-d/2).
DispersiveResult dispersive_experiment(const SymbolModel& symbol, const Box& V, const std::vector<double>& ts,
                                       double lambda, const DispersiveOptions& options = {});

struct BoundRatioReport {
  BoundFormula formula;
  std::vector<double> lambda, scaled, ratio;  ///< scaled = |I| lambda^(d/2); ratio = scaled / prefactor
  double plateau = 0.0;
  double max_ratio = 0.0;
  bool exceeds = false;  ///< some ratio above 1
};

BoundRatioReport bound_ratio_report(const DecaySweepResult& sweep, const BoundFormula& formula);

/// lambda, abs, scaled, bound, ratio, accurate, resolved (bound and ratio empty without a formula).
CsvTable sweep_csv(const DecaySweepResult& sweep, const std::optional<BoundFormula>& formula = std::nullopt);
/// slope, intercept, residual, points, defined.
CsvTable fit_csv(const LinearFit& fit);
/// t, lambda, abs, envelope, in_regime.
CsvTable dispersive_csv(const DispersiveResult& r);
/// lambda, t, re/im of both integrals, discrepancy and the constant checks.
CsvTable rescaling_csv(const std::vector<RescalingReport>& reports);

}  // namespace statphase
