#pragma once

// Non-stationary machinery: A = grad Phi / |grad Phi|^2, L = A . grad, the powers of
// tL g = sum_i d_i(A_i g) = sum_{|alpha| <= N} c_{alpha,N} d^alpha g, and the cutoff psi.
//
// Sign convention: with X = (1 / (i lambda)) L, integration by parts gives
//   (tX)^N g = (i / lambda)^N (tL)^N g,
// since the formal transpose of L is -tL. apply_transpose_power returns this exact quantity.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "statphase/csv.hpp"
#include "statphase/field.hpp"

namespace statphase {

inline constexpr double kDefaultGradientFloor = 1e-14;

enum class CutoffProfile {
  exp_inverse,         ///< transition built from f(t) = exp(-1/t)
  exp_inverse_square,  ///< transition built from f(t) = exp(-1/t^2)
};

/// psi(x) = 1 for |x| <= 1, 0 for |x| >= 2, f(2-|x|) / (f(2-|x|) + f(|x|-1)) in between.
class Cutoff {
 public:
  Cutoff() = default;
  explicit Cutoff(CutoffProfile profile) : profile_(profile) {}

  CutoffProfile profile() const { return profile_; }
  double operator()(double x) const;
  /// d^k psi / dx^k at x.
  double derivative(double x, int order) const;
  /// psi(r) for a jet r with r.value() >= 0; exact constant jets on the flat regions.
  Jet operator()(const Jet& r) const;

 private:
  CutoffProfile profile_ = CutoffProfile::exp_inverse;
};

double cutoff(double x);
double cutoff_deriv(double x, int order);

/// |grad Phi| as a jet of order phi.order() - 1. Requires a nonzero gradient.
Jet gradient_norm_jet(const Jet& phi);

/// psi(sqrt(lambda) |grad Phi|) as a jet of order phi.order() - 1.
Jet cutoff_of_gradient(const Jet& phi, double sqrt_lambda, const Cutoff& psi);

struct FieldA {
  std::vector<Jet> A;  ///< A_i, each of the requested order
  Jet div;             ///< div A, one order lower
  double grad_norm = 0.0;
};

/// A and div A at x with derivatives up to `order` (needs Phi to order + 1).
/// Throws NearCriticalError when |grad Phi(x)| is below `floor`.
FieldA field_A(const PhaseModel& phase, std::span<const double> x, int order,
               double floor = kDefaultGradientFloor);
/// Same, from a jet of Phi of order >= 1 (A gets order phi.order() - 1).
FieldA field_A(const Jet& phi, double floor = kDefaultGradientFloor);

struct IBPCoefficients {
  int N = 0;
  int dim = 0;
  Point point;
  std::vector<double> c;  ///< c_{alpha,N} by graded index, |alpha| <= N

  double operator[](const MultiIndex& alpha) const;
};

/// c_{alpha,N} from the recursion
///   c_{0,k+1}     = div A c_{0,k} + A . grad c_{0,k}
///   c_{gamma,k+1} = div A c_{gamma,k} + A . grad c_{gamma,k} + sum_i A_i c_{gamma - e_i,k}   (1 <= |gamma| <= k)
///   c_{gamma,k+1} = sum_i A_i c_{gamma - e_i,k}                                              (|gamma| = k+1)
/// starting from c_{0,0} = 1.
IBPCoefficients transpose_power_coeffs(const PhaseModel& phase, std::span<const double> x, int N,
                                       double floor = kDefaultGradientFloor);

/// Coefficient jets c_{alpha,N} carrying `extra` further orders of derivatives (for bound checks).
/// Indexed by the graded index of alpha; each jet has order `extra`.
std::vector<Jet> transpose_power_coeff_jets(const Jet& phi, int N, int extra, double floor = kDefaultGradientFloor);

/// sum_alpha c_{alpha,N} d^alpha g for a jet g of order >= N.
double contract(const IBPCoefficients& c, const Jet& g);
double contract(std::span<const double> c, int N, const Jet& g);

/// Jet-valued amplitude: g(x) with derivatives up to the given order.
using Amplitude = std::function<Jet(std::span<const double>, int)>;

/// (tL)^N g at x by N successive applications of g -> sum_i d_i(A_i g).
double apply_transpose_power_real(const PhaseModel& phase, const Amplitude& g, int N, std::span<const double> x,
                                  double floor = kDefaultGradientFloor);

/// (tX)^N g at x, i.e. (i / lambda)^N (tL)^N g.
std::complex<double> apply_transpose_power(const PhaseModel& phase, const Amplitude& g, int N,
                                           std::span<const double> x, double lambda,
                                           double floor = kDefaultGradientFloor);

/// L^N u = (A . grad)^N u at x.
double apply_L_power(const PhaseModel& phase, const Amplitude& u, int N, std::span<const double> x,
                     double floor = kDefaultGradientFloor);

struct LemmaBoundReport {
  int N = 0;
  int samples = 0;
  /// max |D^alpha A_i| / sum_{k=2}^{1+|alpha|} |grad Phi|^-k over 1 <= |alpha| <= N
  double ai_ratio = 0.0;
  long ai_points = 0;
  /// max |d^alpha |grad Phi|| / |grad Phi|^(1-|alpha|) over 1 <= |alpha| <= N, on 0 < |grad Phi| <= 2
  double nablaphi_ratio = 0.0;
  long nablaphi_points = 0;
  /// max |d^beta c_{alpha,N}| / sum_{k=N}^{2N-|alpha|+|beta|} |grad Phi|^-k over |alpha| <= N, |beta| <= beta_max
  double ltranspose_ratio = 0.0;
  long ltranspose_points = 0;
};

struct LemmaBoundOptions {
  int beta_max = 1;
  double grad_min = 0.0;  ///< sample only where grad_min <= |grad Phi| <= grad_max
  double grad_max = 1e300;
  std::uint64_t seed = 42;
};

/// Structural checks of the coefficient lemmas with the non-constructive F replaced by 1.
LemmaBoundReport verify_coefficient_bounds(const PhaseModel& phase, const Box& region, int N, int samples,
                                           const LemmaBoundOptions& options = {});

/// One row per (point, alpha): x_1..x_d, alpha_1..alpha_d, N, value.
CsvTable coefficient_csv(const std::vector<IBPCoefficients>& coeffs);

}  // namespace statphase
