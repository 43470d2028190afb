#include "statphase/families.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "statphase/errors.hpp"

namespace statphase {

namespace {

const std::vector<double>& require(const ParameterMap& p, const std::string& name, const std::string& family) {
  auto it = p.find(name);
  if (it == p.end()) throw ValidationError(family + ": missing parameter '" + name + "'");
  return it->second;
}

double scalar(const ParameterMap& p, const std::string& name, const std::string& family,
              std::optional<double> fallback = std::nullopt) {
  auto it = p.find(name);
  if (it == p.end()) {
    if (fallback) return *fallback;
    throw ValidationError(family + ": missing parameter '" + name + "'");
  }
  if (it->second.size() != 1) throw ValidationError(family + ": parameter '" + name + "' must be a scalar");
  return it->second[0];
}

std::vector<double> vec(const ParameterMap& p, const std::string& name, int dim, const std::string& family,
                        bool zero_default) {
  auto it = p.find(name);
  if (it == p.end()) {
    if (zero_default) return std::vector<double>(static_cast<std::size_t>(dim), 0.0);
    throw ValidationError(family + ": missing parameter '" + name + "'");
  }
  if (it->second.size() != static_cast<std::size_t>(dim)) {
    throw ValidationError(family + ": parameter '" + name + "' must have " + std::to_string(dim) + " entries");
  }
  return it->second;
}

std::string choice(const std::map<std::string, std::string>& c, const std::string& name, const std::string& fallback) {
  auto it = c.find(name);
  return it == c.end() ? fallback : it->second;
}

Expr xi(int i) { return Expr::coord(i); }

Expr squared_norm(int dim) {
  Expr s = xi(0) * xi(0);
  for (int i = 1; i < dim; ++i) s = s + xi(i) * xi(i);
  return s;
}

// Builds <A xi, xi> / 2 after validating symmetry and nonsingularity.
Expr quadratic_form(const std::vector<double>& a, int dim, const std::string& family) {
  if (a.size() != static_cast<std::size_t>(dim * dim)) {
    throw ValidationError(family + ": A must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  Eigen::MatrixXd m(dim, dim);
  double scale = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = a[static_cast<std::size_t>(i * dim + j)];
      scale = std::max(scale, std::abs(m(i, j)));
    }
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
    throw ValidationError(family + ": A must be symmetric");
  }
  if (scale == 0.0 || std::abs(m.determinant()) <= 1e-12 * std::pow(scale, dim)) {
    throw ValidationError(family + ": A must be nonsingular");
  }
  Expr e(0.0);
  bool first = true;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double c = (i == j ? 0.5 : 1.0) * m(i, j);
      if (c == 0.0) continue;
      Expr term = Expr(c) * xi(i) * xi(j);
      e = first ? term : e + term;
      first = false;
    }
  }
  return e;
}

Expr perturbation(const std::string& psi, int dim) {
  if (psi == "cos_first") return cos(xi(0));
  if (psi == "cos_sum") {
    Expr s = cos(xi(0));
    for (int i = 1; i < dim; ++i) s = s + cos(xi(i));
    return s;
  }
  if (psi == "cubic_sum") {
    Expr s = Expr(1.0 / 6.0) * pow(xi(0), 3);
    for (int i = 1; i < dim; ++i) s = s + Expr(1.0 / 6.0) * pow(xi(i), 3);
    return s;
  }
  if (psi == "quartic") return Expr(0.25) * pow(squared_norm(dim), 2);
  throw ValidationError("perturbed_quadratic: unknown psi choice '" + psi + "'");
}

Expr shifted_square(int i, double c) {
  Expr u = c == 0.0 ? xi(i) : xi(i) - Expr(c);
  return u * u;
}

Box centered_box(const std::vector<double>& c, const std::vector<double>& r) {
  Point lo(c.size()), hi(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    lo[i] = c[i] - r[i];
    hi[i] = c[i] + r[i];
  }
  return Box(std::move(lo), std::move(hi));
}

}  // namespace

const std::vector<std::string>& phase_family_names() {
  static const std::vector<std::string> names = {"quadratic", "perturbed_quadratic", "dispersive",
                                                 "custom_polynomial", "cosine", "exp_harmonic"};
  return names;
}

const std::vector<std::string>& symbol_family_names() {
  static const std::vector<std::string> names = {"smooth_bump", "plateau_bump", "product_bump", "polynomial_bump",
                                                 "zero"};
  return names;
}

PhaseModel builtin_phase(const FamilySpec& spec, const Box& domain) {
  const int d = domain.dim();
  const auto& f = spec.family;
  const auto& p = spec.params;

  if (f == "quadratic") {
    return PhaseModel(f, quadratic_form(require(p, "A", f), d, f), domain, p, spec.choices);
  }
  if (f == "perturbed_quadratic") {
    const double eps = scalar(p, "eps", f);
    const auto psi = choice(spec.choices, "psi", "cos_first");
    auto choices = spec.choices;
    choices["psi"] = psi;
    Expr e = quadratic_form(require(p, "A", f), d, f) + Expr(eps) * perturbation(psi, d);
    return PhaseModel(f, e, domain, p, choices);
  }
  if (f == "dispersive") {
    const double t = scalar(p, "t", f);
    if (t < 0.0) throw ValidationError("dispersive: t must be nonnegative");
    const auto x = vec(p, "x", d, f, true);
    const auto y = vec(p, "y", d, f, true);
    const auto theta = choice(spec.choices, "theta", "quadratic");
    Expr th(0.0);
    if (theta == "quadratic") {
      th = Expr(0.5) * squared_norm(d);
    } else if (theta == "klein_gordon") {
      th = sqrt(Expr(1.0) + squared_norm(d));
    } else {
      throw ValidationError("dispersive: unknown theta choice '" + theta + "'");
    }
    Expr e = Expr(t) * th;
    for (int i = 0; i < d; ++i) {
      const double shift = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
      if (shift != 0.0) e = e + Expr(shift) * xi(i);
    }
    auto choices = spec.choices;
    choices["theta"] = theta;
    return PhaseModel(f, e, domain, p, choices);
  }
  if (f == "custom_polynomial") {
    const auto& coeffs = require(p, "coefficients", f);
    const auto& powers = require(p, "powers", f);
    if (powers.size() != coeffs.size() * static_cast<std::size_t>(d)) {
      throw ValidationError("custom_polynomial: powers must hold one row of " + std::to_string(d) +
                            " exponents per coefficient");
    }
    Expr e(0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      Expr term(coeffs[k]);
      for (int i = 0; i < d; ++i) {
        const double pw = powers[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
        if (pw < 0.0 || pw != std::floor(pw)) throw ValidationError("custom_polynomial: exponents must be naturals");
        if (pw > 0.0) term = term * pow(xi(i), static_cast<int>(pw));
      }
      e = e + term;
    }
    return PhaseModel(f, e, domain, p, spec.choices);
  }
  if (f == "cosine") {
    return PhaseModel(f, perturbation("cos_sum", d), domain, p, spec.choices);
  }
  if (f == "exp_harmonic") {
    if (d != 2) throw ValidationError("exp_harmonic is defined for d = 2 only");
    const double s = scalar(p, "s", f, 2.0 * std::numbers::pi);
    if (s <= 0.0) throw ValidationError("exp_harmonic: s must be positive");
    Expr e = Expr(1.0 / (s * s)) * (exp(Expr(s) * xi(0)) * cos(Expr(s) * xi(1)) - Expr(s) * xi(0));
    return PhaseModel(f, e, domain, p, spec.choices);
  }
  throw ValidationError("unknown phase family '" + f + "'");
}

SymbolModel builtin_symbol(const FamilySpec& spec, int dim, const std::optional<Box>& domain) {
  const auto& f = spec.family;
  const auto& p = spec.params;
  std::optional<SymbolModel> out;

  if (f == "smooth_bump") {
    const auto c = vec(p, "center", dim, f, true);
    const double r = scalar(p, "radius", f);
    if (!(r > 0.0)) throw ValidationError("smooth_bump: radius must be positive");
    Expr s = shifted_square(0, c[0]);
    for (int i = 1; i < dim; ++i) s = s + shifted_square(i, c[static_cast<std::size_t>(i)]);
    out.emplace(f, bump(Expr(1.0 / (r * r)) * s), centered_box(c, std::vector<double>(c.size(), r)), -1, p);
  } else if (f == "plateau_bump") {
    const auto c = vec(p, "center", dim, f, true);
    const double inner = scalar(p, "inner", f);
    const double outer = scalar(p, "outer", f);
    if (!(inner >= 0.0) || !(outer > inner)) throw ValidationError("plateau_bump: need 0 <= inner < outer");
    Expr s = shifted_square(0, c[0]);
    for (int i = 1; i < dim; ++i) s = s + shifted_square(i, c[static_cast<std::size_t>(i)]);
    Expr u = Expr(1.0 / (outer * outer - inner * inner)) * (Expr(outer * outer) - s);
    out.emplace(f, smoothstep(u), centered_box(c, std::vector<double>(c.size(), outer)), -1, p);
  } else if (f == "product_bump" || f == "polynomial_bump") {
    const auto c = vec(p, "center", dim, f, true);
    const auto r = vec(p, "radii", dim, f, false);
    for (double ri : r) {
      if (!(ri > 0.0)) throw ValidationError(f + ": radii must be positive");
    }
    const int power = f == "polynomial_bump" ? static_cast<int>(scalar(p, "power", f)) : 0;
    if (f == "polynomial_bump" && power < 1) throw ValidationError("polynomial_bump: power must be >= 1");
    Expr e(1.0);
    for (int i = 0; i < dim; ++i) {
      const auto k = static_cast<std::size_t>(i);
      Expr s = Expr(1.0 / (r[k] * r[k])) * shifted_square(i, c[k]);
      Expr factor = power > 0 ? polybump(s, power) : bump(s);
      e = i == 0 ? factor : e * factor;
    }
    out.emplace(f, e, centered_box(c, r), power > 0 ? power - 1 : -1, p);
  } else if (f == "zero") {
    out.emplace(f, Expr(0.0), Box(vec(p, "lo", dim, f, false), vec(p, "hi", dim, f, false)), -1, p);
  } else {
    throw ValidationError("unknown symbol family '" + f + "'");
  }

  if (domain && !domain->strictly_contains(out->support())) {
    throw ValidationError(f + ": support is not strictly inside the phase domain");
  }
  return *out;
}

}  // namespace statphase
