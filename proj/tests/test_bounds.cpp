#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "statphase/bounds.hpp"
#include "statphase/errors.hpp"
#include "statphase/families.hpp"

using namespace statphase;

namespace {

PhaseModel quad1(double a, double half_width = 2.0) {
  return builtin_phase({"quadratic", {{"A", {a}}}}, Box::cube(1, -half_width, half_width));
}

SymbolModel bump1(double c = 0.0, double r = 1.0) {
  return builtin_symbol({"smooth_bump", {{"center", {c}}, {"radius", {r}}}}, 1);
}

}  // namespace

TEST_CASE("bound formulas") {
  BoundFormula f{BoundVariant::thm1, 2, 0.5, 3.0, 7.0, 1.5};
  // 1.5 * 0.5^-3 * (1 + 3^5) * 7
  CHECK(f.prefactor() == doctest::Approx(1.5 * 8.0 * 244.0 * 7.0).epsilon(1e-15));
  CHECK(f(16.0) == doctest::Approx(f.prefactor() / 16.0).epsilon(1e-15));
  BoundFormula g{BoundVariant::thm2, 2, 0.5, 3.0, 7.0, 1.5};
  CHECK(g.prefactor() == doctest::Approx(1.5 * 2.0 * 4.0 * 7.0).epsilon(1e-15));
  BoundFormula h{BoundVariant::thm2, 1, 1.0, 4.0, 1.0, 1.0};
  CHECK(h(4.0) == doctest::Approx(3.0 * 0.5).epsilon(1e-15));
  f.a0 = 0.0;
  CHECK_THROWS_AS(f.prefactor(), HypothesisError);
}

TEST_CASE("bound formulas are monotone in every input") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int t = 0; t < 500; ++t) {
    for (auto v : {BoundVariant::thm1, BoundVariant::thm2}) {
      BoundFormula f{v, 1 + t % 3, u(rng), u(rng), u(rng), u(rng)};
      const double lambda = 1.0 + 100.0 * u(rng);
      const double base = f(lambda);
      CHECK(f(lambda * 1.5) <= base);
      BoundFormula m = f;
      m.M *= 1.3;
      CHECK(m(lambda) >= base);
      BoundFormula n = f;
      n.N *= 1.3;
      CHECK(n(lambda) >= base);
      BoundFormula a = f;
      a.a0 /= 1.3;
      CHECK(a(lambda) >= base);
    }
  }
}

TEST_CASE("calibration reproduces the measured value") {
  BoundFormula f{BoundVariant::thm2, 2, 1.0, 2.0, 3.0, 99.0};
  f.C = calibrate_constant(f, 0.004, 1024.0);
  CHECK(f(1024.0) == doctest::Approx(0.004).epsilon(1e-14));
}

TEST_CASE("fit_line and geometric_grid") {
  auto g = geometric_grid(4.0, 1024.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == 4.0);
  CHECK(g[1] == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(g[4] == 1024.0);
  std::vector<double> x, y;
  for (double v : g) {
    x.push_back(std::log(v));
    y.push_back(-0.75 * std::log(v) + 2.0);
  }
  auto fit = fit_line(x, y, 0.01);
  CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-13));
  CHECK(fit.intercept == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(fit.defined);
  y[2] += 1.0;
  CHECK_FALSE(fit_line(x, y, 0.01).defined);
  CHECK_FALSE(fit_line({0.0, 1.0}, {0.0, 1.0}, 1.0).defined);
  CHECK_THROWS_AS(geometric_grid(0.0, 1.0, 3), ValidationError);
}

TEST_CASE("decay_sweep") {
  SUBCASE("d = 1 quadratic: slope -1/2") {
    auto r = decay_sweep(quad1(1.0), bump1(), geometric_grid(64, 16384, 9));
    CHECK(r.fit.defined);
    CHECK(r.fit.slope == doctest::Approx(-0.5).epsilon(0.04));
    CHECK(r.fit_lambda_min == doctest::Approx(1024.0));
    // Leading term sqrt(2 pi) b(0).
    CHECK(r.plateau == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-3));
  }
  SUBCASE("d = 2 diag(1, 2): slope -1") {
    auto phi = builtin_phase({"quadratic", {{"A", {1, 0, 0, 2}}}}, Box::cube(2, -1, 1));
    auto b = builtin_symbol({"smooth_bump", {{"center", {0.0, 0.0}}, {"radius", {0.25}}}}, 2);
    auto r = decay_sweep(phi, b, geometric_grid(64, 4096, 7));
    CHECK(r.fit.defined);
    CHECK(std::abs(r.fit.slope + 1.0) <= 0.02);
  }
  SUBCASE("no critical point: fast decay") {
    auto r = decay_sweep(quad1(1.0, 4.0), bump1(2.0, 0.5), geometric_grid(4, 128, 6), [] {
      SweepOptions o;
      o.tail_fraction = 1.0;
      o.residual_threshold = 1e9;
      return o;
    }());
    CHECK(r.fit.slope <= -2.0);
  }
  SUBCASE("decomposition method agrees with the oracle sweep") {
    SweepOptions o;
    o.method = IntegralMethod::decomposition_single_ball;
    auto a = decay_sweep(quad1(1.0), bump1(), {16.0, 64.0, 256.0}, o);
    auto b = decay_sweep(quad1(1.0), bump1(), {16.0, 64.0, 256.0});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a.points[i].abs_value == doctest::Approx(b.points[i].abs_value).epsilon(1e-5));
    }
  }
  SUBCASE("lambda < 1 is rejected") {
    CHECK_THROWS_AS(decay_sweep(quad1(1.0), bump1(), {0.5, 2.0}), ValidationError);
  }
  SUBCASE("capped quadrature points are flagged and excluded") {
    SweepOptions o;
    o.quadrature.max_evaluations = 3000;
    auto r = decay_sweep(quad1(1.0), bump1(), {4.0, 4096.0}, o);
    CHECK(r.points[0].accurate);
    CHECK_FALSE(r.points[1].accurate);
  }
}

TEST_CASE("rescaling_check") {
  SUBCASE("t = 1 is exact") {
    auto r = rescaling_check(quad1(1.0), bump1(), 64.0, 1.0);
    CHECK(r.discrepancy == 0.0);
    CHECK(r.M_relative_error == 0.0);
    CHECK(r.a0_relative_error == 0.0);
  }
  SUBCASE("d = 1 quadratic, t = 2, lambda = 64") {
    auto r = rescaling_check(quad1(1.0), bump1(), 64.0, 2.0);
    CHECK(r.discrepancy <= 1e-7);
    CHECK(r.M_relative_error <= 1e-12);
    CHECK(r.a0_relative_error <= 1e-12);
    CHECK(r.thm1_algebra_error <= 1e-12);
    CHECK(r.thm2_algebra_error <= 1e-12);
  }
  SUBCASE("M_2(Phi / 2) = M_2(Phi) / 2") {
    auto phi = builtin_phase({"perturbed_quadratic", {{"A", {2, 0.5, 0.5, 1}}, {"eps", {0.2}}}, {{"psi", "quartic"}}},
                             Box::cube(2, -1, 1));
    const double step = 2.0 / 40.0;
    const auto m = compute_M(phi, phi.domain(), 4, step);
    const auto ms = compute_M(phi.scaled(0.5), phi.domain(), 4, step);
    CHECK(ms[2] == doctest::Approx(m[2] / 2.0).epsilon(1e-15));
  }
}

TEST_CASE("dispersive_experiment") {
  const auto b = bump1(0.0, 2.0);
  const Box V = Box::cube(1, -3, 3);
  SUBCASE("x = y, quadratic theta: the pure quadratic at t lambda") {
    auto r = dispersive_experiment(b, V, {0.25}, 64.0);
    const double ref = std::abs(oracle_integral(quad1(1.0, 3.0), b, 16.0).value);
    CHECK(r.points[0].abs_value == doctest::Approx(ref).epsilon(1e-9));
  }
  SUBCASE("lambda = 256: slope -1/2 on t >= 4 / lambda") {
    std::vector<double> ts;
    for (int k = -8; k <= 0; ++k) ts.push_back(std::ldexp(1.0, k));
    auto r = dispersive_experiment(b, V, ts, 256.0);
    CHECK(r.fit.defined);
    CHECK(std::abs(r.fit.slope + 0.5) <= 0.05);
    CHECK(r.points.front().in_regime);  // t = 1 / lambda: tlambda = 1, no decay claimed
    for (const auto& p : r.points) CHECK(p.abs_value <= p.envelope * (1.0 + 1e-12));
  }
  SUBCASE("t below 1 / lambda is out of regime") {
    auto r = dispersive_experiment(b, V, {1.0 / 512.0, 1.0 / 8.0}, 256.0);
    CHECK_FALSE(r.points[0].in_regime);
    CHECK(r.points[1].in_regime);
  }
}

TEST_CASE("bound_ratio_report") {
  SUBCASE("reference: ratio 1 at the calibration point") {
    auto phi = quad1(1.0);
    auto b = bump1();
    auto rep = audit(phi, b, {});
    auto sweep = decay_sweep(phi, b, {256.0, 1024.0, 4096.0});
    auto f = BoundFormula::from_report(rep, BoundVariant::thm2);
    f.C = calibrate_constant(f, sweep.points[1].abs_value, 1024.0);
    auto r = bound_ratio_report(sweep, f);
    CHECK(r.ratio[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("shrinking a0 grows the plateau no faster than 1/a0") {
    auto b = bump1();
    double p1 = 0.0;
    std::vector<double> la, lp;
    for (double s : {1.0, 0.5, 0.25, 0.125}) {
      auto sweep = decay_sweep(quad1(s), b, {1024.0, 4096.0});
      if (s == 1.0) p1 = sweep.plateau;
      CHECK(sweep.plateau * s <= p1 * (1.0 + 1e-9));
      la.push_back(std::log(s));
      lp.push_back(std::log(sweep.plateau));
    }
    // Stationary phase predicts a0^(-1/2).
    CHECK(fit_line(la, lp, 1.0).slope == doctest::Approx(-0.5).epsilon(0.05));
  }
}

TEST_CASE("csv outputs") {
  auto sweep = decay_sweep(quad1(1.0), bump1(), {16.0, 64.0});
  BoundFormula f{BoundVariant::thm2, 1, 1.0, 1.0, 1.0, 1.0};
  auto t = sweep_csv(sweep, f);
  CHECK(t.header().size() == 7);
  CHECK(t.rows() == 2);
  CHECK(sweep_csv(sweep).str().find(",,") != std::string::npos);
  CHECK(fit_csv(sweep.fit).rows() == 1);
  auto r = dispersive_experiment(bump1(0.0, 2.0), Box::cube(1, -3, 3), {0.5}, 64.0);
  CHECK(dispersive_csv(r).header().front() == "t");
  CHECK(rescaling_csv({rescaling_check(quad1(1.0), bump1(), 16.0, 1.0)}).rows() == 1);
}
