#pragma once

// I(lambda) = int e^{i lambda Phi} b, by brute force and by the cutoff / partition decomposition
//   I = sum_j K_j + L_j,
//   K_j = int e^{i lambda Phi} psi(lambda^{1/2} |grad Phi|) chi_j b,
//   L_j = int e^{i lambda Phi} (tX)^N [(1 - psi(lambda^{1/2} |grad Phi|)) chi_j b].

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "statphase/csv.hpp"
#include "statphase/field.hpp"
#include "statphase/ibp.hpp"
#include "statphase/partition.hpp"

namespace statphase {

struct QuadratureOptions {
  double rel_tol = 1e-7;
  double abs_tol = 0.0;
  /// Panels per axis in the starting mesh; 0 picks a few oscillations per panel.
  int initial_panels = 0;
  long max_evaluations = 400'000'000;
  int threads = 1;
};

namespace detail {
struct PanelScratch;
}  // namespace detail

/// Receives integrand values at one node.
class QuadratureSink {
 public:
  QuadratureSink(detail::PanelScratch& scratch, double weight, bool high)
      : scratch_(&scratch), weight_(weight), high_(high) {}
  void add(std::size_t component, std::complex<double> value);

 private:
  detail::PanelScratch* scratch_;
  double weight_;
  bool high_;
};

using VectorIntegrand = std::function<void(std::span<const double>, QuadratureSink&)>;

struct QuadratureOutcome {
  std::vector<std::complex<double>> values;  ///< high-order rule
  std::vector<double> errors;                ///< |high - low|
  std::vector<double> magnitudes;            ///< int |f_k|
  std::size_t panels = 0;                    ///< leaves of the final mesh
  long evaluations = 0;
  int levels = 0;
};

/// Adaptive tensor Gauss-Legendre: every panel is integrated by the 30- and 25-point rules and
/// |high - low| is its error. Panels carrying the bulk of the error are bisected on every axis until
/// the summed error of the first `monitored` components is below
/// max(rel_tol |I_0|, abs_tol, 1e-14 int |f_0|). `panels` gives the starting mesh per axis.
/// Throws AccuracyError past max_evaluations.
QuadratureOutcome integrate_box(const Box& box, std::size_t components, const VectorIntegrand& f,
                                std::span<const int> panels, const QuadratureOptions& options = {},
                                std::size_t monitored = 1);

enum class IntegralMethod { oracle, decomposition, decomposition_single_ball };
std::string to_string(IntegralMethod m);

struct BallContribution {
  std::size_t j = 0;
  std::complex<double> K, L;
  double K_error = 0.0, L_error = 0.0;
};

struct OscillatoryIntegralResult {
  double lambda = 0.0;
  std::complex<double> value;
  IntegralMethod method = IntegralMethod::oracle;
  double error_estimate = 0.0;
  double symbol_mass = 0.0;  ///< int |b|
  bool trivial_bound_holds = true;
  long evaluations = 0;
  std::size_t panels = 0;
  std::size_t J = 1;
  int N = 0;
  std::complex<double> K_total, L_total;
  std::vector<BallContribution> balls;
  std::vector<std::string> warnings;
};

/// Panels per axis for about three oscillations of e^{i lambda Phi} per panel on `box`.
std::vector<int> oscillation_panels(const PhaseModel& phase, const Box& box, double lambda);

/// Brute-force I(lambda) over supp b (d <= 3).
OscillatoryIntegralResult oracle_integral(const PhaseModel& phase, const SymbolModel& symbol, double lambda,
                                          const QuadratureOptions& options = {});

/// I_j = int e^{i lambda Phi} chi_j b, each over its own ball's bounding box.
std::vector<std::complex<double>> partitioned_oracle_integrals(const PhaseModel& phase, const SymbolModel& symbol,
                                                               double lambda, const PartitionOfUnity& partition,
                                                               const QuadratureOptions& options = {});

struct DecompositionOptions {
  QuadratureOptions quadrature;
  /// 0 means d + 1.
  int N = 0;
  Cutoff cutoff;
  /// Hessian determinant floor from an audit; computed on a coarse grid when absent.
  std::optional<double> a0;
};

/// sum_j K_j + L_j on one shared grid. Throws HypothesisError when a0 <= 0.
OscillatoryIntegralResult decomposition_integral(const PhaseModel& phase, const SymbolModel& symbol, double lambda,
                                                 const PartitionOfUnity& partition,
                                                 const DecompositionOptions& options = {});

struct NearStationaryMeasure {
  double measure = 0.0;
  double standard_error = 0.0;
  double threshold = 0.0;  ///< 2 lambda^{-1/2}
  long samples = 0;
  long hits = 0;
  double candidate_volume = 0.0;
};

/// Monte Carlo measure of {xi in region : |grad Phi(xi)| <= 2 lambda^{-1/2}}. Samples are drawn only
/// from grid cells that can meet the set (Lipschitz screen with twice the largest sampled Hessian norm).
NearStationaryMeasure near_stationary_measure(const PhaseModel& phase, double lambda, const Box& region,
                                              long samples = 100000, std::uint64_t seed = 42);

/// lambda, method, re, im, abs, error_estimate, J, N.
CsvTable integral_csv(const std::vector<OscillatoryIntegralResult>& results);

}  // namespace statphase
