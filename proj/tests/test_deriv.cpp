#include <doctest.h>

#include <cmath>
#include <random>

#include "statphase/errors.hpp"
#include "statphase/families.hpp"
#include "statphase/field.hpp"
#include "support/fd_oracle.hpp"

using namespace statphase;
using statphase::testing::close_rel;
using statphase::testing::richardson_derivative;

namespace {

PhaseModel poly_phase(int dim, std::vector<double> powers, std::vector<double> coeffs, const Box& v) {
  return builtin_phase({"custom_polynomial", {{"powers", std::move(powers)}, {"coefficients", std::move(coeffs)}}}, v);
}

std::vector<int> to_vec(const MultiIndex& a, int d) { return std::vector<int>(a.begin(), a.begin() + d); }

}  // namespace

TEST_CASE("derivatives_at on closed-form polynomial and trigonometric phases") {
  SUBCASE("xi^2/2 at 3") {
    auto phi = poly_phase(1, {2}, {0.5}, Box::cube(1, -5, 5));
    auto t = derivatives_at(phi, std::vector<double>{3.0}, 3);
    CHECK(t.value() == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(t[{1}] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(t[{2}] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t[{3}] == 0.0);
  }
  SUBCASE("(xi1^2 + 2 xi2^2)/2 at (1,1)") {
    auto phi = builtin_phase({"quadratic", {{"A", {1, 0, 0, 2}}}}, Box::cube(2, -2, 2));
    auto t = derivatives_at(phi, std::vector<double>{1.0, 1.0}, 2);
    CHECK(t.gradient() == std::vector<double>{1.0, 2.0});
    CHECK(t.hessian() == std::vector<double>{1.0, 0.0, 0.0, 2.0});
  }
  SUBCASE("xi^2/2 + 0.1 sin xi at 0 matches the finite-difference oracle") {
    auto phi = poly_phase(1, {2}, {0.5}, Box::cube(1, -2, 2));
    PhaseModel p("custom", Expr(0.5) * Expr::coord(0) * Expr::coord(0) + Expr(0.1) * sin(Expr::coord(0)),
                 Box::cube(1, -2, 2));
    auto t = derivatives_at(p, std::vector<double>{0.0}, 3);
    auto f = [&](const std::vector<double>& x) { return p.value(x); };
    const double expected[4] = {0.0, 0.1, 1.0, -0.1};
    for (int k = 0; k <= 3; ++k) {
      const double fd = k == 0 ? f({0.0}) : richardson_derivative(f, {0.0}, {k}, 0.2);
      CHECK(std::abs(fd - expected[k]) < 1e-7);
      CHECK(t[{static_cast<std::uint8_t>(k)}] == doctest::Approx(expected[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("builtin_phase families") {
  SUBCASE("quadratic identity is |xi|^2/2") {
    auto phi = builtin_phase({"quadratic", {{"A", {1, 0, 0, 1}}}}, Box::cube(2, -1, 1));
    CHECK(phi.value(std::vector<double>{0.3, -0.4}) == doctest::Approx(0.125).epsilon(1e-15));
  }
  SUBCASE("dispersive at t = 0 is linear with zero Hessian") {
    auto phi = builtin_phase({"dispersive", {{"t", {0.0}}, {"x", {0.5, 0.0}}, {"y", {0.0, -0.25}}}},
                             Box::cube(2, -1, 1));
    auto t = derivatives_at(phi, std::vector<double>{0.2, 0.7}, 2);
    CHECK(t.value() == doctest::Approx(0.5 * 0.2 + 0.25 * 0.7));
    for (double h : t.hessian()) CHECK(h == 0.0);
  }
  SUBCASE("perturbed quadratic with cos(xi1)") {
    auto phi = builtin_phase({"perturbed_quadratic", {{"A", {1, 0, 0, 1}}, {"eps", {0.05}}}, {{"psi", "cos_first"}}},
                             Box::cube(2, -1, 1));
    auto h = derivatives_at(phi, std::vector<double>{0.0, 0.0}, 2).hessian();
    CHECK(h[0] == doctest::Approx(0.95).epsilon(1e-14));
    CHECK(h[3] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h[0] * h[3] - h[1] * h[2] == doctest::Approx(0.95).epsilon(1e-14));
  }
  SUBCASE("validation errors") {
    CHECK_THROWS_AS(builtin_phase({"quadratic", {{"A", {1, 2, 2, 4}}}}, Box::cube(2, -1, 1)), ValidationError);
    CHECK_THROWS_AS(builtin_phase({"quadratic", {{"A", {1, 2, 0, 4}}}}, Box::cube(2, -1, 1)), ValidationError);
    CHECK_THROWS_AS(builtin_phase({"nope", {}}, Box::cube(2, -1, 1)), ValidationError);
    CHECK_THROWS_AS(builtin_phase({"perturbed_quadratic", {{"A", {1}}, {"eps", {0.1}}}, {{"psi", "bogus"}}},
                                  Box::cube(1, -1, 1)),
                    ValidationError);
  }
}

TEST_CASE("builtin_symbol families") {
  auto bump = builtin_symbol({"smooth_bump", {{"center", {0.0}}, {"radius", {1.0}}}}, 1);
  CHECK(bump.value(std::vector<double>{0.0}) == 1.0);
  CHECK(bump.value(std::vector<double>{1.0}) == 0.0);
  CHECK(bump.value(std::vector<double>{0.5}) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)));

  auto plateau = builtin_symbol({"plateau_bump", {{"center", {0.0}}, {"inner", {1.0}}, {"outer", {2.0}}}}, 1);
  CHECK(plateau.value(std::vector<double>{0.5}) == 1.0);
  CHECK(plateau.value(std::vector<double>{2.0}) == 0.0);
  const double mid = plateau.value(std::vector<double>{1.5});
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);

  CHECK_THROWS_AS(builtin_symbol({"smooth_bump", {{"radius", {0.0}}}}, 1), ValidationError);
  CHECK_THROWS_AS(builtin_symbol({"smooth_bump", {{"radius", {1.0}}}}, 1, Box::cube(1, -1, 1)), ValidationError);
  CHECK_NOTHROW(builtin_symbol({"smooth_bump", {{"radius", {1.0}}}}, 1, Box::cube(1, -1.1, 1.1)));
  CHECK_THROWS_AS(builtin_symbol({"product_bump", {{"radii", {1.0, -1.0}}}}, 2), ValidationError);
}

TEST_CASE("domain and capability errors") {
  auto phi = builtin_phase({"quadratic", {{"A", {1.0}}}}, Box::cube(1, -1, 1));
  CHECK_THROWS_AS(derivatives_at(phi, std::vector<double>{1.5}, 2), DomainError);
  CHECK_THROWS_AS(derivatives_at(phi, std::vector<double>{0.5}, kMaxJetOrder + 1), CapabilityError);
  auto poly = builtin_symbol({"polynomial_bump", {{"radii", {1.0}}, {"power", {3.0}}}}, 1);
  CHECK_NOTHROW(derivatives_at(poly, std::vector<double>{0.1}, 2));
  CHECK_THROWS_AS(derivatives_at(poly, std::vector<double>{0.1}, 3), CapabilityError);
}

TEST_CASE("Schwarz symmetry: differentiating jets in either order agrees") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  PhaseModel p("custom",
               sin(Expr::coord(0) * Expr::coord(1)) + exp(Expr(0.3) * Expr::coord(2)) * cos(Expr::coord(0)) +
                   pow(Expr::coord(1) - Expr::coord(2), 3),
               Box::cube(3, -1, 1));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x = {u(rng), u(rng), u(rng)};
    Jet j = p.jet(x, 4);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        Jet ab = partial(partial(j, a), b);
        Jet ba = partial(partial(j, b), a);
        for (std::size_t k = 0; k < ab.size(); ++k) {
          CHECK(close_rel(ab.coeff(k), ba.coeff(k), 1e-10, 1e-14));
        }
      }
    }
  }
}

TEST_CASE("every builtin family matches the Richardson finite-difference oracle") {
  std::mt19937_64 rng(42);
  struct Case {
    std::string name;
    PhaseModel phase;
    int order;
  };
  const Box v2 = Box::cube(2, -0.9, 0.9);
  std::vector<Case> cases = {
      {"quadratic", builtin_phase({"quadratic", {{"A", {2, 0.5, 0.5, -1}}}}, v2), 4},
      {"perturbed", builtin_phase({"perturbed_quadratic", {{"A", {1, 0, 0, 2}}, {"eps", {0.2}}}, {{"psi", "quartic"}}}, v2), 4},
      {"perturbed_cos", builtin_phase({"perturbed_quadratic", {{"A", {1, 0, 0, 1}}, {"eps", {0.3}}}, {{"psi", "cos_sum"}}}, v2), 4},
      {"dispersive_kg", builtin_phase({"dispersive", {{"t", {0.7}}, {"x", {0.2, 0.1}}, {"y", {0.0, 0.3}}}, {{"theta", "klein_gordon"}}}, v2), 4},
      {"custom", builtin_phase({"custom_polynomial", {{"powers", {3, 0, 1, 2, 0, 4}}, {"coefficients", {0.5, -1, 0.25}}}}, v2), 4},
      {"cosine", builtin_phase({"cosine", {}}, v2), 4},
      {"exp_harmonic", builtin_phase({"exp_harmonic", {{"s", {2.0}}}}, v2), 4},
  };
  const auto& sp = JetSpace::get(2);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (auto& c : cases) {
    CAPTURE(c.name);
    auto f = [&](const std::vector<double>& x) { return c.phase.value_unchecked(x); };
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x = {u(rng), u(rng)};
      auto t = derivatives_at(c.phase, x, c.order);
      for (std::size_t idx = 1; idx < sp.size(c.order); ++idx) {
        const int k = total_order(sp.alpha(idx));
        const double fd = richardson_derivative(f, x, to_vec(sp.alpha(idx), 2), k == 1 ? 0.05 : 0.1);
        CHECK(close_rel(t.values()[idx], fd, 1e-6, 1e-6));
      }
    }
  }

  std::vector<std::pair<std::string, SymbolModel>> symbols = {
      {"smooth_bump", builtin_symbol({"smooth_bump", {{"center", {0.1, 0.0}}, {"radius", {0.8}}}}, 2)},
      {"product_bump", builtin_symbol({"product_bump", {{"center", {0.0, 0.1}}, {"radii", {0.9, 0.7}}}}, 2)},
      {"plateau_bump", builtin_symbol({"plateau_bump", {{"inner", {0.2}}, {"outer", {0.9}}}}, 2)},
      {"polynomial_bump", builtin_symbol({"polynomial_bump", {{"radii", {0.9, 0.8}}, {"power", {6}}}}, 2)},
  };
  std::uniform_real_distribution<double> us(-0.5, 0.5);
  for (auto& [name, b] : symbols) {
    CAPTURE(name);
    auto f = [&](const std::vector<double>& x) { return b.value(x); };
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x = {us(rng), us(rng)};
      auto t = derivatives_at(b, x, 3);
      for (std::size_t idx = 1; idx < sp.size(3); ++idx) {
        const double fd = richardson_derivative(f, x, to_vec(sp.alpha(idx), 2), 0.02);
        CHECK(close_rel(t.values()[idx], fd, 1e-6, 1e-6));
      }
    }
  }
}

TEST_CASE("builtin symbols vanish exactly outside their support box") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<SymbolModel> symbols = {
      builtin_symbol({"smooth_bump", {{"center", {0.2, -0.1}}, {"radius", {0.5}}}}, 2),
      builtin_symbol({"product_bump", {{"center", {0.0, 0.0}}, {"radii", {0.5, 0.3}}}}, 2),
      builtin_symbol({"plateau_bump", {{"inner", {0.1}}, {"outer", {0.5}}}}, 2),
  };
  for (const auto& b : symbols) {
    const auto c = b.support().center();
    int tested = 0;
    while (tested < 500) {
      std::vector<double> x = {c[0] + u(rng) * 0.5 * b.support().width(0), c[1] + u(rng) * 0.5 * b.support().width(1)};
      if (b.support().strictly_contains(Box(x, x))) continue;
      ++tested;
      CHECK(b.value(x) == 0.0);
      CHECK(b.jet(x, 3).is_zero());
    }
  }
}

TEST_CASE("evaluation is bitwise deterministic") {
  auto phi = builtin_phase({"perturbed_quadratic", {{"A", {1, 0.2, 0.2, 1}}, {"eps", {0.1}}}, {{"psi", "cos_sum"}}},
                           Box::cube(2, -1, 1));
  std::vector<double> x = {0.123456789, -0.987654321};
  const auto a = phi.jet(x, 4);
  const auto b = phi.jet(x, 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.coeff(i) == b.coeff(i));
  CHECK(phi.value(x) == phi.value(x));
}

TEST_CASE("jet algebra matches elementary identities") {
  Jet x = Jet::variable(1, 6, 0, 0.3);
  Jet s = sin(x), c = cos(x);
  Jet one = s * s + c * c;
  CHECK(one.value() == doctest::Approx(1.0));
  for (std::size_t k = 1; k < one.size(); ++k) CHECK(std::abs(one.coeff(k)) < 1e-14);
  Jet r = reciprocal(exp(x)) * exp(x);
  for (std::size_t k = 1; k < r.size(); ++k) CHECK(std::abs(r.coeff(k)) < 1e-14);
  Jet q = sqrt(x) * sqrt(x) - x;
  for (std::size_t k = 0; k < q.size(); ++k) CHECK(std::abs(q.coeff(k)) < 1e-13);
  Jet l = exp(log(x)) - x;
  for (std::size_t k = 0; k < l.size(); ++k) CHECK(std::abs(l.coeff(k)) < 1e-13);
}

TEST_CASE("multiplicity counts ordered index tuples") {
  const auto& sp = JetSpace::get(2);
  CHECK(sp.multiplicity(sp.index({1, 1})) == 2.0);
  CHECK(sp.multiplicity(sp.index({2, 0})) == 1.0);
  CHECK(sp.multiplicity(sp.index({2, 1})) == 3.0);
}
