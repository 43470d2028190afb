#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "statphase/csv.hpp"
#include "statphase/field.hpp"

namespace statphase {

/// a0 / (12 C'_d M3 (C_d M2)^(d-1)), or `delta_cap` when M3 == 0.
double compute_delta(double a0, double M2, double M3, int d, double C_d, double C_prime_d, double delta_cap);

/// Lattice centers with spacing at most delta / sqrt(d), endpoints of K included, so that every point of
/// K lies within delta / 2 of a center. Throws ResourceError when the count would exceed `hard_cap`.
std::vector<Point> build_cover(const Box& K, double delta, std::size_t hard_cap = 1'000'000);

/// Constant C_K with J <= C_K delta^(-d) for the lattice cover whenever delta <= diam K:
/// prod_i (w_i sqrt(d) + 2 diam K).
double cover_constant(const Box& K);

/// Shepard partition chi_j = w_j / sum_k w_k with w_j = bump(|x - c_j|^2 / delta^2).
class PartitionOfUnity {
 public:
  PartitionOfUnity(Box support, double delta, std::vector<Point> centers);
  /// Lattice cover of `support` (see build_cover).
  static PartitionOfUnity lattice(const Box& support, double delta, std::size_t hard_cap = 1'000'000);
  /// One ball centred on the box, radius 1.5 times its half-diagonal (the undivided integral).
  static PartitionOfUnity single_ball(const Box& support);

  const Box& support() const { return support_; }
  double delta() const { return delta_; }
  int dim() const { return support_.dim(); }
  std::size_t size() const { return centers_.size(); }
  const std::vector<Point>& centers() const { return centers_; }
  const Point& center(std::size_t j) const { return centers_[j]; }

  /// Indices of balls whose open disc contains x.
  void active(std::span<const double> x, std::vector<std::size_t>& out) const;

  /// chi_j(x) for all j. Throws CoverDefectError when no ball contains x.
  void weights(std::span<const double> x, std::span<double> out) const;
  std::vector<double> weights(std::span<const double> x) const;

  /// Jets of the nonzero chi_j at x, as (j, jet) pairs ordered by j.
  void weight_jets(std::span<const double> x, int order, std::vector<std::pair<std::size_t, Jet>>& out) const;

 private:
  Box support_;
  double delta_;
  std::vector<Point> centers_;
  // Lattice layout when the centers came from build_cover; empty otherwise.
  std::vector<int> counts_;
  Point origin_, step_;
};

/// partition_weights: one row of chi_j per point.
std::vector<std::vector<double>> partition_weights(const PartitionOfUnity& p, const std::vector<Point>& points);

/// max over sampled x in K, balls j and 1 <= |alpha| <= order of |D^alpha chi_j(x)| delta^|alpha|.
double partition_derivative_scale(const PartitionOfUnity& p, int order, int samples, std::uint64_t seed = 42);

struct LocalInjectivityResult {
  double constant = 0.0;  ///< 5 a0 / (6 (C_d M2)^(d-1))
  long pairs = 0;
  long violations = 0;
  double min_ratio = 0.0;  ///< min |grad(x) - grad(y)| / |x - y| over tested pairs
};

/// Samples `pairs` point pairs (spread round-robin over balls) inside B(c_j, delta) intersected with the
/// phase domain and checks |grad(x) - grad(y)| >= constant |x - y|.
LocalInjectivityResult check_local_injectivity(const PhaseModel& phase, const PartitionOfUnity& p, double a0,
                                               double M2, double C_d, long pairs, std::uint64_t seed = 42);

/// j, c_1..c_d, delta.
CsvTable cover_csv(const PartitionOfUnity& p);

}  // namespace statphase
