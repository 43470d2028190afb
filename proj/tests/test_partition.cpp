#include <doctest.h>

#include <cmath>
#include <random>

#include "statphase/audit.hpp"
#include "statphase/errors.hpp"
#include "statphase/families.hpp"
#include "statphase/partition.hpp"
#include "support/fd_oracle.hpp"

using namespace statphase;

namespace {

// Brute-force covering radius: max over a fine grid of K of the distance to the nearest center.
double covering_radius(const Box& K, const std::vector<Point>& centers, int per_axis) {
  const int d = K.dim();
  double worst = 0.0;
  std::vector<int> k(static_cast<std::size_t>(d), 0);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(per_axis);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    Point x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      x[static_cast<std::size_t>(i)] = K.lo(i) + K.width(i) * static_cast<double>(rest % per_axis) / (per_axis - 1);
      rest /= static_cast<std::size_t>(per_axis);
    }
    double best = 1e300;
    for (const auto& c : centers) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += (x[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)]) *
                                       (x[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)]);
      best = std::min(best, std::sqrt(s));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("compute_delta") {
  CHECK(compute_delta(1, 1, 1, 1, 1, 0.5, 9.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(compute_delta(1, 7.5, 1, 1, 1, 0.5, 9.0) == compute_delta(1, 1, 1, 1, 1, 0.5, 9.0));
  CHECK(compute_delta(2, 3, 0, 2, 2, 2, 1.25) == 1.25);
  CHECK(compute_delta(2, 3, 1, 2, 2, 2, 1.25) == doctest::Approx(2.0 / (12.0 * 2.0 * 6.0)).epsilon(1e-15));
  CHECK_THROWS_AS(compute_delta(0, 1, 1, 1, 1, 0.5, 1.0), DegeneratePhaseError);
}

TEST_CASE("build_cover") {
  SUBCASE("K = [-1,1], delta = 2") {
    const Box K = Box::cube(1, -1, 1);
    auto c = build_cover(K, 2.0);
    CHECK(c.size() == 2);
    CHECK(covering_radius(K, c, 2001) <= 1.0 + 1e-12);
  }
  SUBCASE("degenerate box") {
    CHECK(build_cover(Box({0.3, 0.4}, {0.3, 0.4}), 0.1).size() == 1);
  }
  SUBCASE("K = [-1,1]^2, delta = 0.5") {
    const Box K = Box::cube(2, -1, 1);
    auto c = build_cover(K, 0.5);
    CHECK(covering_radius(K, c, 201) <= 0.25 + 1e-12);
    CHECK(static_cast<double>(c.size()) <= cover_constant(K) * std::pow(0.5, -2));
    CHECK(c.size() == 49);
  }
  SUBCASE("J bound across delta in 3d") {
    const Box K({-0.5, -0.2, 0.0}, {0.5, 0.3, 0.4});
    for (double delta : {0.05, 0.1, 0.3, K.diameter()}) {
      auto c = build_cover(K, delta);
      CHECK(static_cast<double>(c.size()) <= cover_constant(K) * std::pow(delta, -3));
      CHECK(covering_radius(K, c, 21) <= delta / 2 + 1e-12);
    }
  }
  SUBCASE("resource cap") {
    CHECK_THROWS_AS(build_cover(Box::cube(3, -1, 1), 1e-3), ResourceError);
    CHECK_THROWS_AS(build_cover(Box::cube(2, -1, 1), 0.01, 100), ResourceError);
  }
}

TEST_CASE("partition_weights") {
  SUBCASE("single ball") {
    PartitionOfUnity p(Box::cube(2, -1, 1), 2.0, {{0.0, 0.0}});
    for (const auto& row : partition_weights(p, {{0.1, 0.2}, {-0.9, 0.9}, {0.0, 0.0}})) CHECK(row[0] == 1.0);
  }
  SUBCASE("equidistant from two balls") {
    PartitionOfUnity p(Box::cube(1, -1, 1), 1.0, {{-0.5}, {0.5}});
    auto w = p.weights(std::vector<double>{0.0});
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 0.5);
  }
  SUBCASE("J = 9 lattice rows sum to one") {
    const Box K = Box::cube(2, -1, 1);
    auto p = PartitionOfUnity::lattice(K, std::sqrt(2.0) * 1.0001);
    CHECK(p.size() == 9);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Point> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({u(rng), u(rng)});
    for (const auto& row : partition_weights(p, pts)) {
      double s = 0.0;
      for (double w : row) {
        CHECK(w >= 0.0);
        s += w;
      }
      CHECK(std::abs(s - 1.0) <= 1e-10);
    }
  }
  SUBCASE("uncovered point") {
    PartitionOfUnity p(Box::cube(1, -1, 1), 0.5, {{0.0}});
    CHECK_THROWS_AS(p.weights(std::vector<double>{0.9}), CoverDefectError);
  }
}

TEST_CASE("cover completeness on 10^4 random points") {
  const Box K({-0.7, -0.3}, {0.5, 0.6});
  auto p = PartitionOfUnity::lattice(K, 0.13);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> x = {K.lo(0) + K.width(0) * u(rng), K.lo(1) + K.width(1) * u(rng)};
    auto w = p.weights(x);
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      s += w[j];
      if (w[j] > 0.0) {
        const double dx = x[0] - p.center(j)[0], dy = x[1] - p.center(j)[1];
        if (std::sqrt(dx * dx + dy * dy) >= p.delta()) ++bad;
      }
    }
    if (std::abs(s - 1.0) > 1e-10) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("weight jets match finite differences of the weights") {
  const Box K = Box::cube(2, -0.5, 0.5);
  auto p = PartitionOfUnity::lattice(K, 0.4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.45, 0.45);
  const auto& sp = JetSpace::get(2);
  std::vector<std::pair<std::size_t, Jet>> jets;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x = {u(rng), u(rng)};
    p.weight_jets(x, 3, jets);
    double sum = 0.0;
    for (const auto& [j, jet] : jets) {
      sum += jet.value();
      auto f = [&, j = j](const std::vector<double>& y) {
        std::vector<std::size_t> act;
        p.active(y, act);
        return act.empty() ? 0.0 : p.weights(y)[j];
      };
      for (std::size_t idx = 0; idx < sp.size(2); ++idx) {
        const auto a = sp.alpha(idx);
        const double fd = idx == 0 ? f(x) : testing::richardson_derivative(f, x, {a[0], a[1]}, 0.001, 3);
        CAPTURE(x[0]);
        CAPTURE(x[1]);
        CAPTURE(j);
        CAPTURE(idx);
        CAPTURE(fd);
        CHECK(testing::close_rel(jet.derivative_at(idx), fd, 1e-5, 1e-6));
      }
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("derivative bound |D^alpha chi_j| delta^|alpha| is independent of delta") {
  const Box K = Box::cube(2, -1, 1);
  const double s1 = partition_derivative_scale(PartitionOfUnity::lattice(K, 0.4), 3, 2000);
  const double s2 = partition_derivative_scale(PartitionOfUnity::lattice(K, 0.2), 3, 2000);
  CHECK(std::isfinite(s1));
  CHECK(std::max(s1, s2) / std::min(s1, s2) <= 2.0);
}

TEST_CASE("local injectivity inside every ball") {
  const Box v = Box::cube(2, -1, 1);
  auto phi = builtin_phase({"perturbed_quadratic", {{"A", {1, 0.2, 0.2, 1.5}}, {"eps", {0.2}}}, {{"psi", "cubic_sum"}}}, v);
  auto b = builtin_symbol({"smooth_bump", {{"radius", {0.6}}}}, 2, v);
  AuditOptions o;
  o.grid_points = 101;
  o.injectivity_samples = 100;
  auto rep = audit(phi, b, o);
  REQUIRE(rep.passed());
  auto part = PartitionOfUnity::lattice(b.support(), rep.delta);
  auto r = check_local_injectivity(phi, part, rep.a0, rep.M[2], rep.constants.C_d, 10000);
  CHECK(r.pairs == 10000);
  CHECK(r.violations == 0);
  CHECK(r.min_ratio >= r.constant);
}

TEST_CASE("cover csv") {
  auto p = PartitionOfUnity::lattice(Box::cube(1, -1, 1), 2.0);
  auto t = cover_csv(p);
  CHECK(t.header() == std::vector<std::string>{"j", "c1", "delta"});
  CHECK(t.str().find("1,1,2\n") != std::string::npos);
}
