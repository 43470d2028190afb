#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "statphase/field.hpp"

namespace statphase {

/// Family name plus its numeric parameters and named choices (e.g. psi = "cos_first").
struct FamilySpec {
  std::string family;
  ParameterMap params;
  std::map<std::string, std::string> choices;
};

/// Phase families:
///   quadratic            A (d x d, symmetric, nonsingular)              Phi = <A xi, xi> / 2
///   perturbed_quadratic  A, eps; choice psi in {cos_first, cos_sum, cubic_sum, quartic}
///                                                                       Phi = <A xi, xi> / 2 + eps Psi
///   dispersive           t, x (d), y (d); choice theta in {quadratic, klein_gordon}
///                                                                       Phi = (x - y) . xi + t theta(xi)
///   custom_polynomial    powers (k x d, row-major), coefficients (k)   Phi = sum_k c_k xi^p_k
///   cosine               (none)                                         Phi = sum_i cos xi_i
///   exp_harmonic         s (d = 2 only)                                 Phi = (e^{s xi1} cos(s xi2) - s xi1) / s^2
/// The dimension is taken from the domain box.
PhaseModel builtin_phase(const FamilySpec& spec, const Box& domain);

/// Symbol families (all normalized to 1 at their center):
///   smooth_bump      center (d), radius          b = bump(|xi - c|^2 / r^2)
///   plateau_bump     center (d), inner, outer    b = 1 on |xi - c| <= inner, 0 beyond outer
///   product_bump     center (d), radii (d)       b = prod_i bump((xi_i - c_i)^2 / r_i^2)
///   polynomial_bump  center (d), radii (d), power m
///                                                b = prod_i (1 - (xi_i - c_i)^2 / r_i^2)_+^m, C^(m-1)
///   zero             lo (d), hi (d)              b = 0 with the given support box
/// When `domain` is given the support must lie strictly inside it.
SymbolModel builtin_symbol(const FamilySpec& spec, int dim, const std::optional<Box>& domain = std::nullopt);

const std::vector<std::string>& phase_family_names();
const std::vector<std::string>& symbol_family_names();

}  // namespace statphase
