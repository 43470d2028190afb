#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "statphase/bounds.hpp"
#include "statphase/families.hpp"
#include "statphase/field.hpp"
#include "statphase/quadrature.hpp"

namespace statphase::cli {

inline constexpr int kSchemaVersion = 1;

struct GridSpec {
  double start = 1.0;
  double stop = 1.0;
  int count = 1;

  std::vector<double> values() const;
};

struct Overrides {
  std::optional<double> C_d;
  std::optional<double> C_prime_d;
  std::optional<int> N;
  std::optional<double> delta_cap;
  std::optional<double> delta;  ///< partition spacing for the lattice decomposition
  std::optional<int> audit_grid_points;
  std::optional<double> calibration_C;
  double rel_tol = 1e-7;
  double max_evaluations = 4e8;
  long near_stationary_samples = 100000;
};

struct SweepSpec {
  BoundVariant bound = BoundVariant::thm2;
  double tail_fraction = 0.5;
  double residual_threshold = 0.05;
};

struct DispersiveSpec {
  std::string theta = "quadratic";
  double lambda = 256.0;
  GridSpec t{1.0 / 64.0, 1.0, 7};
  std::vector<double> x, y;
  double fit_t_min_factor = 4.0;
};

struct RescaleSpec {
  double lambda = 64.0;
  std::vector<double> t{0.5, 2.0};
};

struct LemmaSpec {
  std::vector<int> N;  ///< empty: 1..d+1
  int samples = 10000;
  double grad_min = 0.0;
  double grad_max = 2.0;
  int beta_max = 1;
  long injectivity_pairs = 10000;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  FamilySpec phase;
  Box domain;
  FamilySpec symbol;
  GridSpec lambda{64.0, 16384.0, 9};
  std::vector<IntegralMethod> methods{IntegralMethod::oracle};
  std::string output_dir = "out";
  std::uint64_t seed = 42;
  Overrides overrides;
  SweepSpec sweep;
  DispersiveSpec dispersive;
  RescaleSpec rescale;
  LemmaSpec lemmas;

  /// Normalized echo, defaults filled in.
  nlohmann::json raw;

  int dim() const { return domain.dim(); }
  PhaseModel make_phase() const;
  SymbolModel make_symbol() const;
};

/// Parses and validates; errors carry line and column (syntax) or the JSON path (content).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// "key=value" lines (flattened JSON pointers) for CSV provenance headers.
std::vector<std::string> provenance_lines(const ExperimentConfig& config, const std::string& command);

}  // namespace statphase::cli
