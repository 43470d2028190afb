#include <doctest.h>

#include <cmath>
#include <random>

#include "statphase/audit.hpp"
#include "statphase/errors.hpp"
#include "statphase/families.hpp"

using namespace statphase;

namespace {

PhaseModel quadratic(std::vector<double> a, const Box& v) { return builtin_phase({"quadratic", {{"A", std::move(a)}}}, v); }

PhaseModel half_square_plus_sine(const Box& v) {
  return PhaseModel("custom", Expr(0.5) * Expr::coord(0) * Expr::coord(0) + Expr(0.1) * sin(Expr::coord(0)), v);
}

// Max of |f| over n equally spaced points in [lo, hi], for closed-form oracles.
template <class F>
double dense_sup(F f, double lo, double hi, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::abs(f(lo + (hi - lo) * i / (n - 1))));
  return m;
}

}  // namespace

TEST_CASE("compute_M") {
  SUBCASE("xi^2/2 on (-2,2)") {
    auto M = compute_M(quadratic({1.0}, Box::cube(1, -2, 2)), Box::cube(1, -2, 2), 3, 0.01);
    CHECK(M[2] == 1.0);
    CHECK(M[3] == 1.0);
  }
  SUBCASE("diag(1,2) counts the mixed index twice") {
    auto M = compute_M(quadratic({1, 0, 0, 2}, Box::cube(2, -1, 1)), Box::cube(2, -1, 1), 2, 0.1);
    CHECK(M[2] == 3.0);
  }
  SUBCASE("xi^2/2 + 0.1 sin xi matches a dense closed-form oracle") {
    const Box v = Box::cube(1, -2, 2);
    auto M = compute_M(half_square_plus_sine(v), v, 3, 0.01);
    const double m2 = dense_sup([](double x) { return 1.0 - 0.1 * std::sin(x); }, -2, 2, 4001);
    const double m3 = m2 + dense_sup([](double x) { return -0.1 * std::cos(x); }, -2, 2, 4001);
    CHECK(M[3] == doctest::Approx(m3).epsilon(1e-6));
    CHECK(M[3] == doctest::Approx(1.2).epsilon(1e-6));
  }
  SUBCASE("empty grid") {
    CHECK_THROWS_AS(compute_M(quadratic({1.0}, Box::cube(1, -0.01, 0.01)), Box::cube(1, -0.01, 0.01), 2, 0.5),
                    ValidationError);
  }
}

TEST_CASE("compute_N") {
  auto plateau = builtin_symbol({"plateau_bump", {{"inner", {0.5}}, {"outer", {1.0}}}}, 1);
  CHECK(compute_N(plateau, 2, 0.01)[0] == 1.0);

  auto zero = builtin_symbol({"zero", {{"lo", {-1, -1}}, {"hi", {1, 1}}}}, 2);
  for (double n : compute_N(zero, 3, 0.1)) CHECK(n == 0.0);

  auto bump = builtin_symbol({"smooth_bump", {{"center", {0.0}}, {"radius", {1.0}}}}, 1);
  auto N = compute_N(bump, 2, 1e-4);
  auto db = [](double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    const double q = 1.0 - x * x;
    return std::exp(1.0 - 1.0 / q) * (-2.0 * x / (q * q));
  };
  const double sup_db = dense_sup(db, -1, 1, 200001);
  CHECK(N[0] == 1.0);
  CHECK(N[1] - N[0] == doctest::Approx(sup_db).epsilon(1e-6));
  // The normalized bump has sup |b'| = 2.1703..., e times the unnormalized profile's.
  CHECK(sup_db == doctest::Approx(2.1704).epsilon(1e-4));
}

TEST_CASE("compute_a0") {
  CHECK(compute_a0(quadratic({1, 0, 0, 2}, Box::cube(2, -1, 1)), Box::cube(2, -1, 1), 0.1).a0 == 2.0);

  auto linear = builtin_phase({"dispersive", {{"t", {0.0}}, {"x", {1.0, 0.5}}}}, Box::cube(2, -1, 1));
  auto r = compute_a0(linear, Box::cube(2, -1, 1), 0.1);
  CHECK(r.degenerate);
  CHECK(r.a0 == 0.0);

  auto pert = builtin_phase({"perturbed_quadratic", {{"A", {1, 0, 0, 1}}, {"eps", {0.05}}}, {{"psi", "cos_first"}}},
                            Box::cube(2, -1, 1));
  auto rp = compute_a0(pert, Box::cube(2, -1, 1), 0.01);
  // min over the grid of 1 - 0.05 cos(xi_1), attained at xi_1 = 0 (a grid point).
  CHECK(rp.a0 == doctest::Approx(0.95).epsilon(1e-14));
  CHECK(std::abs(rp.argmin[0]) < 1e-12);
}

TEST_CASE("eigenvalue_floor") {
  CHECK(eigenvalue_floor(1.0, 123.0, 1, 1.0) == 1.0);
  CHECK(eigenvalue_floor(2.0, 3.0, 2, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(eigenvalue_floor(0.0, 3.0, 2, 2.0), DegeneratePhaseError);

  auto phi = quadratic({1, 0, 0, 2}, Box::cube(2, -1, 1));
  auto b = builtin_symbol({"smooth_bump", {{"radius", {0.5}}}}, 2);
  AuditOptions o;
  o.grid_points = 21;
  auto rep = audit(phi, b, o);
  CHECK(rep.min_abs_eigenvalue == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rep.eigenvalue_floor == doctest::Approx(2.0 / (2.0 * 3.0)));
  CHECK(rep.eigenvalue_floor_holds);
}

TEST_CASE("check_injectivity") {
  SUBCASE("|xi|^2/2 is verified") {
    auto r = check_injectivity(quadratic({1, 0, 0, 1}, Box::cube(2, -1, 1)), Box::cube(2, -1, 1), 1000);
    CHECK(r.verdict == Verdict::verified);
    CHECK(r.violations == 0);
    CHECK(r.min_observed_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("cos on (-6,6) is refuted with a witness of equal gradients") {
    const Box v = Box::cube(1, -6, 6);
    auto phi = builtin_phase({"cosine", {}}, v);
    auto r = check_injectivity(phi, v, 100);
    REQUIRE(r.verdict == Verdict::refuted);
    REQUIRE(r.witness);
    const double a = r.witness->first[0], b = r.witness->second[0];
    CHECK(std::abs(a - b) > 1e-3);
    CHECK(std::abs(-std::sin(a) + std::sin(b)) < 1e-10);
  }
  SUBCASE("small perturbation of the identity is verified on 10^4 pairs") {
    const Box v = Box::cube(2, -1, 1);
    auto phi = builtin_phase({"perturbed_quadratic", {{"A", {1, 0, 0, 1}}, {"eps", {0.1}}}, {{"psi", "cos_sum"}}}, v);
    auto r = check_injectivity(phi, v, 10000);
    CHECK(r.verdict == Verdict::verified);
    CHECK(r.pairs_tested == 10000);
  }
  SUBCASE("an indefinite injective phase is undetermined, never refuted") {
    const Box v = Box::cube(2, -1, 1);
    auto r = check_injectivity(quadratic({1, 0, 0, -1}, v), v, 100);
    CHECK(r.verdict == Verdict::undetermined);
  }
  SUBCASE("negative definite counts as verified") {
    const Box v = Box::cube(2, -1, 1);
    CHECK(check_injectivity(quadratic({-1, 0, 0, -2}, v), v, 100).verdict == Verdict::verified);
  }
}

TEST_CASE("taylor_remainder_check") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::vector<std::pair<Point, Point>> pairs2;
  for (int i = 0; i < 100; ++i) pairs2.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
  CHECK(taylor_remainder_check(quadratic({2, 1, 1, 3}, Box::cube(2, -1, 1)), pairs2, 0.0) == 0.0);

  const Box v1 = Box::cube(1, -1, 1);
  PhaseModel cubic("custom", Expr(1.0 / 6.0) * pow(Expr::coord(0), 3), v1);
  for (double h : {0.1, 0.5, 0.9}) {
    CHECK(taylor_remainder_check(cubic, {{{h}, {0.0}}}, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  }

  const Box v3 = Box::cube(3, -1, 1);
  PhaseModel smooth("custom",
                    sin(Expr::coord(0) + Expr(0.5) * Expr::coord(1)) + exp(Expr(0.3) * Expr::coord(2)) * cos(Expr::coord(1)) +
                        Expr(0.2) * pow(Expr::coord(0) * Expr::coord(2), 2),
                    v3);
  std::vector<std::pair<Point, Point>> pairs3;
  std::uniform_real_distribution<double> u3(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) pairs3.push_back({{u3(rng), u3(rng), u3(rng)}, {u3(rng), u3(rng), u3(rng)}});
  const double m3 = compute_M3_third(smooth, v3, 0.05);
  const double ratio = taylor_remainder_check(smooth, pairs3, m3);
  CHECK(ratio <= AuditConstants::defaults(3).C_prime_d);
  CHECK(ratio <= 0.5);
}

TEST_CASE("monotonicity in resolution") {
  const Box v = Box::cube(2, -1, 1);
  auto phi = builtin_phase({"perturbed_quadratic", {{"A", {1, 0.3, 0.3, 2}}, {"eps", {0.2}}}, {{"psi", "quartic"}}}, v);
  auto b = builtin_symbol({"smooth_bump", {{"center", {0.1, 0.0}}, {"radius", {0.7}}}}, 2);
  double step = 0.2;
  auto prevM = compute_M(phi, v, 4, step);
  auto prevN = compute_N(b, 3, step);
  double prevA = compute_a0(phi, v, step).a0;
  for (int r = 0; r < 3; ++r) {
    step *= 0.5;
    auto M = compute_M(phi, v, 4, step);
    auto N = compute_N(b, 3, step);
    double a = compute_a0(phi, v, step).a0;
    for (std::size_t k = 2; k < M.size(); ++k) CHECK(M[k] >= prevM[k]);
    for (std::size_t l = 0; l < N.size(); ++l) CHECK(N[l] >= prevN[l]);
    CHECK(a <= prevA);
    prevM = M;
    prevN = N;
    prevA = a;
  }
}

TEST_CASE("scaling covariance of audited constants") {
  const Box v = Box::cube(2, -1, 1);
  auto phi = builtin_phase({"perturbed_quadratic", {{"A", {2, 0.5, 0.5, 1}}, {"eps", {0.1}}}, {{"psi", "cos_sum"}}}, v);
  for (double t : {2.0, 3.7, 0.25}) {
    auto scaled = phi.scaled(1.0 / t);
    auto M = compute_M(phi, v, 4, 0.05), Ms = compute_M(scaled, v, 4, 0.05);
    for (std::size_t k = 2; k < M.size(); ++k) CHECK(Ms[k] == doctest::Approx(M[k] / t).epsilon(1e-12));
    CHECK(compute_a0(scaled, v, 0.05).a0 == doctest::Approx(compute_a0(phi, v, 0.05).a0 / (t * t)).epsilon(1e-12));
  }
}

TEST_CASE("full audit report") {
  const Box v = Box::cube(2, -1, 1);
  auto phi = builtin_phase({"perturbed_quadratic", {{"A", {1, 0, 0, 1}}, {"eps", {0.05}}}, {{"psi", "cos_first"}}}, v);
  auto b = builtin_symbol({"smooth_bump", {{"radius", {0.5}}}}, 2, v);
  AuditOptions o;
  o.grid_points = 101;
  o.injectivity_samples = 2000;
  auto r = audit(phi, b, o);

  CHECK(r.passed());
  CHECK(r.a0 == doctest::Approx(0.95).epsilon(1e-14));
  CHECK(r.constants.C_d == 2.0);
  CHECK(r.constants.C_prime_d == 2.0);
  REQUIRE(r.M.size() == 5);
  REQUIRE(r.N.size() == 4);
  for (std::size_t k = 3; k < r.M.size(); ++k) CHECK(r.M[k] >= r.M[k - 1]);
  for (std::size_t l = 1; l < r.N.size(); ++l) CHECK(r.N[l] >= r.N[l - 1]);
  CHECK(r.a0 <= std::pow(r.constants.C_d * r.M[2], 2));
  CHECK(r.eigen_det_mismatch <= 1e-9);
  CHECK(r.positive_definite);
  CHECK(r.injectivity.verdict == Verdict::verified);
  CHECK(r.taylor_ratio <= r.constants.C_prime_d);
  CHECK(r.delta > 0.0);
  CHECK_FALSE(r.delta_capped);

  const auto kv = to_key_value(r);
  CHECK(kv.find("a0 = 0.95") != std::string::npos);
  CHECK(kv.find("injective = verified") != std::string::npos);
  CHECK(to_csv(r).rows() > 10);
}

TEST_CASE("audit of a degenerate phase") {
  const Box v = Box::cube(2, -1, 1);
  auto linear = builtin_phase({"dispersive", {{"t", {0.0}}, {"x", {1.0, 0.0}}}}, v);
  auto b = builtin_symbol({"smooth_bump", {{"radius", {0.5}}}}, 2);
  AuditOptions o;
  o.grid_points = 21;
  auto r = audit(linear, b, o);
  CHECK_FALSE(r.passed());
  CHECK(r.degenerate);
  CHECK(r.a0 == 0.0);
  CHECK(r.injectivity.verdict != Verdict::verified);
}

TEST_CASE("positive definite Hessian never yields a refuted verdict") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const Box v = Box::cube(2, -1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const double off = u(rng);
    auto phi = builtin_phase({"perturbed_quadratic", {{"A", {1.5, off, off, 1.5}}, {"eps", {0.1 * (u(rng) + 0.5)}}},
                              {{"psi", "cos_sum"}}},
                             v);
    InjectivityOptions io;
    io.grid_points = 41;
    io.seed = static_cast<std::uint64_t>(trial);
    auto r = check_injectivity(phi, v, 500, io);
    CHECK(r.verdict != Verdict::refuted);
    CHECK(r.violations == 0);
  }
}
