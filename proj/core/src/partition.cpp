#include "statphase/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "statphase/errors.hpp"

namespace statphase {

double compute_delta(double a0, double M2, double M3, int d, double C_d, double C_prime_d, double delta_cap) {
  if (!(a0 > 0.0)) throw DegeneratePhaseError("delta needs a0 > 0");
  if (M3 < 0.0 || M2 < 0.0) throw ValidationError("delta needs nonnegative M_2, M_3");
  if (M3 == 0.0) return delta_cap;
  return a0 / (12.0 * C_prime_d * M3 * std::pow(C_d * M2, d - 1));
}

namespace {

std::vector<int> lattice_counts(const Box& K, double delta) {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  const double spacing = delta / std::sqrt(static_cast<double>(K.dim()));
  std::vector<int> counts;
  for (int i = 0; i < K.dim(); ++i) {
    const double w = K.width(i);
    const double n = w == 0.0 ? 1.0 : std::ceil(w / spacing - 1e-12) + 1.0;
    if (n > 1e9) throw ResourceError("cover too fine: reduce the support box or increase delta");
    counts.push_back(static_cast<int>(n));
  }
  return counts;
}

double lattice_coord(const Box& K, int axis, int n, int k) {
  if (n == 1) return K.lo(axis);
  if (k == n - 1) return K.hi(axis);
  return K.lo(axis) + K.width(axis) * k / (n - 1);
}

}  // namespace

std::vector<Point> build_cover(const Box& K, double delta, std::size_t hard_cap) {
  const auto counts = lattice_counts(K, delta);
  double total = 1.0;
  for (int c : counts) total *= c;
  if (total > static_cast<double>(hard_cap)) {
    throw ResourceError("cover would need " + format_double(total) + " balls (cap " + std::to_string(hard_cap) +
                        "); use a smaller test domain");
  }
  const int d = K.dim();
  std::vector<Point> centers;
  centers.reserve(static_cast<std::size_t>(total));
  std::vector<int> k(static_cast<std::size_t>(d), 0);
  for (std::size_t flat = 0; flat < static_cast<std::size_t>(total); ++flat) {
    std::size_t rest = flat;
    Point c(static_cast<std::size_t>(d));
    for (int i = d - 1; i >= 0; --i) {
      const auto n = static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]);
      c[static_cast<std::size_t>(i)] = lattice_coord(K, i, static_cast<int>(n), static_cast<int>(rest % n));
      rest /= n;
    }
    centers.push_back(std::move(c));
  }
  return centers;
}

double cover_constant(const Box& K) {
  const double sd = std::sqrt(static_cast<double>(K.dim()));
  double c = 1.0;
  for (int i = 0; i < K.dim(); ++i) c *= K.width(i) * sd + 2.0 * K.diameter();
  return c;
}

PartitionOfUnity::PartitionOfUnity(Box support, double delta, std::vector<Point> centers)
    : support_(std::move(support)), delta_(delta), centers_(std::move(centers)) {
  if (!(delta_ > 0.0)) throw ValidationError("delta must be positive");
  if (centers_.empty()) throw ValidationError("partition needs at least one center");
  for (const auto& c : centers_) {
    if (static_cast<int>(c.size()) != support_.dim()) throw ValidationError("center dimension mismatch");
  }
}

PartitionOfUnity PartitionOfUnity::lattice(const Box& support, double delta, std::size_t hard_cap) {
  PartitionOfUnity p(support, delta, build_cover(support, delta, hard_cap));
  p.counts_ = lattice_counts(support, delta);
  p.origin_ = support.lo();
  p.step_.resize(static_cast<std::size_t>(support.dim()));
  for (int i = 0; i < support.dim(); ++i) {
    const int n = p.counts_[static_cast<std::size_t>(i)];
    p.step_[static_cast<std::size_t>(i)] = n > 1 ? support.width(i) / (n - 1) : 0.0;
  }
  return p;
}

PartitionOfUnity PartitionOfUnity::single_ball(const Box& support) {
  const double r = 0.75 * support.diameter();
  return PartitionOfUnity(support, r > 0.0 ? r : 1.0, {support.center()});
}

void PartitionOfUnity::active(std::span<const double> x, std::vector<std::size_t>& out) const {
  out.clear();
  const int d = dim();
  const double r2 = delta_ * delta_;
  auto inside = [&](const Point& c) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += (x[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)]) *
                                     (x[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)]);
    return s < r2;
  };
  if (counts_.empty()) {
    for (std::size_t j = 0; j < centers_.size(); ++j) {
      if (inside(centers_[j])) out.push_back(j);
    }
    return;
  }
  std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const int n = counts_[k];
    if (n == 1) {
      lo[k] = hi[k] = 0;
      continue;
    }
    lo[k] = std::max(0, static_cast<int>(std::floor((x[k] - delta_ - origin_[k]) / step_[k])));
    hi[k] = std::min(n - 1, static_cast<int>(std::ceil((x[k] + delta_ - origin_[k]) / step_[k])));
    if (lo[k] > hi[k]) return;
  }
  std::vector<int> idx = lo;
  while (true) {
    std::size_t flat = 0;
    for (int i = 0; i < d; ++i) flat = flat * static_cast<std::size_t>(counts_[static_cast<std::size_t>(i)]) +
                                       static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
    if (inside(centers_[flat])) out.push_back(flat);
    int axis = d - 1;
    while (axis >= 0 && idx[static_cast<std::size_t>(axis)] == hi[static_cast<std::size_t>(axis)]) {
      idx[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
      --axis;
    }
    if (axis < 0) break;
    idx[static_cast<std::size_t>(axis)]++;
  }
}

void PartitionOfUnity::weights(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  thread_local std::vector<std::size_t> act;
  active(x, act);
  double sum = 0.0;
  for (std::size_t j : act) {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const double t = x[static_cast<std::size_t>(i)] - centers_[j][static_cast<std::size_t>(i)];
      s += t * t;
    }
    out[j] = scalar_fn::bump(s / (delta_ * delta_));
    sum += out[j];
  }
  if (!(sum > 0.0)) throw CoverDefectError("point not covered by any ball of the partition");
  for (std::size_t j : act) out[j] /= sum;
}

std::vector<double> PartitionOfUnity::weights(std::span<const double> x) const {
  std::vector<double> w(centers_.size());
  weights(x, w);
  return w;
}

void PartitionOfUnity::weight_jets(std::span<const double> x, int order,
                                   std::vector<std::pair<std::size_t, Jet>>& out) const {
  out.clear();
  const int d = dim();
  thread_local std::vector<std::size_t> act;
  active(x, act);
  if (act.empty()) throw CoverDefectError("point not covered by any ball of the partition");
  if (centers_.size() == 1) {
    out.emplace_back(0, Jet::constant(d, order, 1.0));
    return;
  }
  const double inv_r2 = 1.0 / (delta_ * delta_);
  Jet sum(d, order);
  for (std::size_t j : act) {
    Jet s(d, order);
    for (int i = 0; i < d; ++i) {
      const Jet t = Jet::variable(d, order, i, x[static_cast<std::size_t>(i)] - centers_[j][static_cast<std::size_t>(i)]);
      multiply_accumulate(s, t, t);
    }
    s *= inv_r2;
    Jet w = bump(s);
    if (w.value() == 0.0 && w.is_zero()) continue;
    sum += w;
    out.emplace_back(j, std::move(w));
  }
  if (out.empty() || !(sum.value() > 0.0)) throw CoverDefectError("point not covered by any ball of the partition");
  const Jet inv = reciprocal(sum);
  for (auto& [j, w] : out) w = w * inv;
}

std::vector<std::vector<double>> partition_weights(const PartitionOfUnity& p, const std::vector<Point>& points) {
  std::vector<std::vector<double>> rows;
  rows.reserve(points.size());
  for (const auto& x : points) rows.push_back(p.weights(x));
  return rows;
}

double partition_derivative_scale(const PartitionOfUnity& p, int order, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& sp = JetSpace::get(p.dim());
  std::vector<std::pair<std::size_t, Jet>> jets;
  double worst = 0.0;
  Point x(static_cast<std::size_t>(p.dim()));
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < p.dim(); ++i) x[static_cast<std::size_t>(i)] = p.support().lo(i) + p.support().width(i) * u(rng);
    p.weight_jets(x, order, jets);
    for (const auto& [j, jet] : jets) {
      for (std::size_t idx = 1; idx < sp.size(order); ++idx) {
        const int k = total_order(sp.alpha(idx));
        worst = std::max(worst, std::abs(jet.derivative_at(idx)) * std::pow(p.delta(), k));
      }
    }
  }
  return worst;
}

LocalInjectivityResult check_local_injectivity(const PhaseModel& phase, const PartitionOfUnity& p, double a0,
                                               double M2, double C_d, long pairs, std::uint64_t seed) {
  const int d = phase.dim();
  LocalInjectivityResult r;
  r.constant = 5.0 * a0 / (6.0 * std::pow(C_d * M2, d - 1));
  r.min_ratio = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box& V = phase.domain();

  // Uniform point in B(c, delta) intersected with V, by rejection.
  auto sample = [&](const Point& c, Point& out) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      double n2 = 0.0;
      for (int i = 0; i < d; ++i) {
        out[static_cast<std::size_t>(i)] = gauss(rng);
        n2 += out[static_cast<std::size_t>(i)] * out[static_cast<std::size_t>(i)];
      }
      const double rad = p.delta() * std::pow(u(rng), 1.0 / d) / std::sqrt(n2);
      bool ok = true;
      for (int i = 0; i < d; ++i) {
        auto& v = out[static_cast<std::size_t>(i)];
        v = c[static_cast<std::size_t>(i)] + rad * v;
        if (v < V.lo(i) || v > V.hi(i)) ok = false;
      }
      if (ok) return true;
    }
    return false;
  };

  Point x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
  for (long s = 0; s < pairs; ++s) {
    const auto& c = p.center(static_cast<std::size_t>(s) % p.size());
    if (!sample(c, x) || !sample(c, y)) continue;
    const Jet jx = phase.jet_unchecked(x, 1), jy = phase.jet_unchecked(y, 1);
    double g2 = 0.0, h2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double dg = jx.coeff(1 + k) - jy.coeff(1 + k);
      g2 += dg * dg;
      h2 += (x[k] - y[k]) * (x[k] - y[k]);
    }
    if (h2 == 0.0) continue;
    const double ratio = std::sqrt(g2 / h2);
    r.min_ratio = std::min(r.min_ratio, ratio);
    ++r.pairs;
    if (ratio < r.constant) ++r.violations;
  }
  return r;
}

CsvTable cover_csv(const PartitionOfUnity& p) {
  std::vector<std::string> header{"j"};
  for (int i = 0; i < p.dim(); ++i) header.push_back("c" + std::to_string(i + 1));
  header.emplace_back("delta");
  CsvTable t(std::move(header));
  for (std::size_t j = 0; j < p.size(); ++j) {
    std::vector<std::string> row{std::to_string(j)};
    for (double v : p.center(j)) row.push_back(format_double(v));
    row.push_back(format_double(p.delta()));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace statphase
