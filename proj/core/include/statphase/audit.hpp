#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "statphase/csv.hpp"
#include "statphase/field.hpp"

namespace statphase {

/// Dimensional constants of the estimates. The defaults are C_d = d and C'_d = d^2 / 2.
struct AuditConstants {
  double C_d = 1.0;
  double C_prime_d = 0.5;

  static AuditConstants defaults(int dim);
};

/// Per-axis audit grid size used when none is configured: 201 for d <= 2, 61 for d = 3, 21 above.
int default_audit_points(int dim);

/// M[k] = sum over 2 <= |alpha| <= k of sup |D^alpha Phi| on the grid, each ordered index tuple counted
/// separately. Entries 0 and 1 are zero; the vector has max_order + 1 entries.
std::vector<double> compute_M(const PhaseModel& phase, const Box& V, int max_order, double grid_step,
                              int threads = 1);

/// N[l] = sum over |alpha| <= l of sup |D^alpha b| on the grid over the support box K.
std::vector<double> compute_N(const SymbolModel& symbol, int max_order, double grid_step, int threads = 1);

/// Third-order part of M_3: sum over |alpha| = 3 (ordered tuples) of sup |D^alpha Phi|. This is the constant
/// that controls the Taylor remainder of grad Phi.
double compute_M3_third(const PhaseModel& phase, const Box& V, double grid_step, int threads = 1);

struct A0Result {
  double a0 = 0.0;          ///< 0 when degenerate
  double min_abs_det = 0.0; ///< raw minimum, even when below the threshold
  bool degenerate = false;
  Point argmin;
};

A0Result compute_a0(const PhaseModel& phase, const Box& V, double grid_step, double degeneracy_threshold = 1e-12,
                    int threads = 1);

/// a0 / (C_d M_2)^(d-1). Throws DegeneratePhaseError when a0 <= 0.
double eigenvalue_floor(double a0, double M2, int d, double C_d);

enum class Verdict { verified, refuted, undetermined };
std::string to_string(Verdict v);

struct InjectivityResult {
  Verdict verdict = Verdict::undetermined;
  /// Two distinct points with equal gradients, when refuted.
  std::optional<std::pair<Point, Point>> witness;
  /// Constant of the monotonicity inequality that was tested (0 when not tested).
  double monotonicity_constant = 0.0;
  /// Smallest observed <grad(x) - grad(y), x - y> / |x - y|^2, sign-adjusted for negative definite Hessians.
  double min_observed_ratio = 0.0;
  long pairs_tested = 0;
  long violations = 0;
  std::string note;
};

struct InjectivityOptions {
  int grid_points = 0;  ///< 0: default_audit_points(d)
  std::uint64_t seed = 42;
  AuditConstants constants{};
  bool constants_set = false;
  int threads = 1;
};

/// Verified when the Hessian is definite on the grid and the monotonicity inequality with constant
/// a0 / (C_d M_2)^(d-1) holds on `samples` random pairs; refuted with a witness pair when a distinct point
/// with the same gradient is found; undetermined otherwise.
InjectivityResult check_injectivity(const PhaseModel& phase, const Box& V, int samples,
                                    const InjectivityOptions& options = {});

/// max over pairs of |R| / (M3 |x - y|^2) with R = grad(x) - grad(y) - Hess(y)(x - y).
/// M3 = 0 gives 0 when every R vanishes to rounding and +inf otherwise.
double taylor_remainder_check(const PhaseModel& phase, const std::vector<std::pair<Point, Point>>& pairs, double M3);

struct AuditOptions {
  int grid_points = 0;  ///< per axis; 0: default_audit_points(d)
  double degeneracy_threshold = 1e-12;
  int injectivity_samples = 10000;
  int taylor_pairs = 1000;
  std::optional<double> C_d;
  std::optional<double> C_prime_d;
  std::optional<double> delta_cap;  ///< default: diameter of supp b
  std::uint64_t seed = 42;
  int threads = 1;
};

struct HypothesisReport {
  int dim = 0;
  std::string phase_family;
  std::string symbol_family;
  std::vector<double> M;  ///< M[k], k = 2..d+2 (entries 0, 1 unused)
  std::vector<double> N;  ///< N[l], l = 0..d+1
  double M3_third = 0.0;
  double a0 = 0.0;
  double min_abs_det = 0.0;
  bool degenerate = false;
  double eigenvalue_floor = 0.0;
  double min_abs_eigenvalue = 0.0;
  bool eigenvalue_floor_holds = false;
  /// max relative mismatch between prod |lambda_j| and |det Hess| over the grid
  double eigen_det_mismatch = 0.0;
  bool positive_definite = false;
  bool negative_definite = false;
  InjectivityResult injectivity;
  double taylor_ratio = 0.0;
  double delta = 0.0;
  bool delta_capped = false;
  double audit_resolution = 0.0;
  int grid_points = 0;
  AuditConstants constants;

  bool passed() const { return !degenerate && a0 > 0.0; }
};

HypothesisReport audit(const PhaseModel& phase, const SymbolModel& symbol, const AuditOptions& options = {});

/// "key = value" lines, one per constant.
std::string to_key_value(const HypothesisReport& report);
/// One row per constant: name, value.
CsvTable to_csv(const HypothesisReport& report);

}  // namespace statphase
