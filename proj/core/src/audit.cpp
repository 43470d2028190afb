#include "statphase/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "detail/parallel.hpp"
#include "statphase/errors.hpp"
#include "statphase/grid.hpp"
#include "statphase/partition.hpp"

namespace statphase {

AuditConstants AuditConstants::defaults(int dim) {
  const double d = dim;
  return {d, 0.5 * d * d};
}

int default_audit_points(int dim) {
  if (dim <= 2) return 201;
  if (dim == 3) return 61;
  if (dim == 4) return 11;
  return 7;
}

namespace {

struct Scan {
  std::vector<double> sup_abs;  // per graded index
  double min_abs_det = std::numeric_limits<double>::infinity();
  Point argmin;
  double min_abs_eig = std::numeric_limits<double>::infinity();
  double max_mismatch = 0.0;
  bool all_pd = true;
  bool all_nd = true;
};

template <class JetFn>
Scan scan_grid(const UniformGrid& grid, int order, bool hessian_stats, int threads, JetFn&& jet_at) {
  const int d = grid.dim();
  const auto& sp = JetSpace::get(d);
  const std::size_t ncoef = sp.size(order);
  const std::size_t chunks = detail::kDefaultChunks;
  std::vector<Scan> partial(chunks);

  detail::parallel_chunks(grid.size(), chunks, threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    Scan s;
    s.sup_abs.assign(ncoef, 0.0);
    Point x(static_cast<std::size_t>(d));
    Eigen::MatrixXd h(d, d);
    for (std::size_t p = b; p < e; ++p) {
      grid.point(p, x);
      const Jet j = jet_at(x, order);
      for (std::size_t k = 0; k < ncoef; ++k) s.sup_abs[k] = std::max(s.sup_abs[k], std::abs(j.derivative_at(k)));
      if (!hessian_stats) continue;
      for (int r = 0; r < d; ++r) {
        for (int q = 0; q < d; ++q) {
          MultiIndex a{};
          a[static_cast<std::size_t>(r)]++;
          a[static_cast<std::size_t>(q)]++;
          h(r, q) = j.derivative(a);
        }
      }
      const double det = std::abs(h.determinant());
      if (det < s.min_abs_det) {
        s.min_abs_det = det;
        s.argmin = x;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      double prod = 1.0;
      for (int r = 0; r < d; ++r) {
        prod *= std::abs(ev(r));
        s.min_abs_eig = std::min(s.min_abs_eig, std::abs(ev(r)));
      }
      if (det > 0.0) s.max_mismatch = std::max(s.max_mismatch, std::abs(prod - det) / det);
      if (!(ev.minCoeff() > 0.0)) s.all_pd = false;
      if (!(ev.maxCoeff() < 0.0)) s.all_nd = false;
    }
    partial[c] = std::move(s);
  });

  Scan out;
  out.sup_abs.assign(ncoef, 0.0);
  for (auto& s : partial) {
    if (s.sup_abs.empty()) continue;
    for (std::size_t k = 0; k < ncoef; ++k) out.sup_abs[k] = std::max(out.sup_abs[k], s.sup_abs[k]);
    if (s.min_abs_det < out.min_abs_det) {
      out.min_abs_det = s.min_abs_det;
      out.argmin = s.argmin;
    }
    out.min_abs_eig = std::min(out.min_abs_eig, s.min_abs_eig);
    out.max_mismatch = std::max(out.max_mismatch, s.max_mismatch);
    out.all_pd = out.all_pd && s.all_pd;
    out.all_nd = out.all_nd && s.all_nd;
  }
  return out;
}

Scan scan_phase(const PhaseModel& phase, const UniformGrid& grid, int order, int threads) {
  if (order > kMaxJetOrder) throw CapabilityError("derivative order exceeds the engine cap");
  return scan_grid(grid, order, order >= 2, threads,
                   [&](const Point& x, int m) { return phase.jet_unchecked(x, m); });
}

// sum over min_order <= |alpha| <= k of multiplicity * sup, for each k.
std::vector<double> summed_sups(const std::vector<double>& sup_abs, int dim, int min_order, int max_order) {
  const auto& sp = JetSpace::get(dim);
  std::vector<double> out(static_cast<std::size_t>(max_order + 1), 0.0);
  double acc = 0.0;
  for (int k = 0; k <= max_order; ++k) {
    if (k >= min_order) {
      for (std::size_t idx = k == 0 ? 0 : sp.size(k - 1); idx < sp.size(k); ++idx) {
        acc += sp.multiplicity(idx) * sup_abs[idx];
      }
      out[static_cast<std::size_t>(k)] = acc;
    }
  }
  return out;
}

double third_order_part(const std::vector<double>& sup_abs, int dim) {
  const auto& sp = JetSpace::get(dim);
  double s = 0.0;
  for (std::size_t idx = sp.size(2); idx < sp.size(3); ++idx) s += sp.multiplicity(idx) * sup_abs[idx];
  return s;
}

void check_max_order(int max_order, int cap, const char* what) {
  if (max_order < 0) throw ValidationError(std::string(what) + ": negative order");
  if (max_order > cap) throw CapabilityError(std::string(what) + ": order exceeds the supported maximum");
}

Point random_point(const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point p(static_cast<std::size_t>(box.dim()));
  for (int i = 0; i < box.dim(); ++i) p[static_cast<std::size_t>(i)] = box.lo(i) + box.width(i) * u(rng);
  return p;
}

std::vector<double> gradient_of(const PhaseModel& phase, const Point& x) {
  const Jet j = phase.jet_unchecked(x, 1);
  std::vector<double> g(static_cast<std::size_t>(phase.dim()));
  for (int i = 0; i < phase.dim(); ++i) g[static_cast<std::size_t>(i)] = j.coeff(static_cast<std::size_t>(1 + i));
  return g;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Newton iteration for grad Phi(eta) = target starting at eta, kept inside V.
bool solve_gradient(const PhaseModel& phase, const Box& V, const std::vector<double>& target, Point& eta,
                    double tol) {
  const int d = phase.dim();
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd r(d);
  for (int it = 0; it < 60; ++it) {
    const Jet j = phase.jet_unchecked(eta, 2);
    for (int a = 0; a < d; ++a) {
      r(a) = j.coeff(static_cast<std::size_t>(1 + a)) - target[static_cast<std::size_t>(a)];
      for (int b = 0; b < d; ++b) {
        MultiIndex m{};
        m[static_cast<std::size_t>(a)]++;
        m[static_cast<std::size_t>(b)]++;
        h(a, b) = j.derivative(m);
      }
    }
    if (r.norm() <= tol) return true;
    Eigen::VectorXd step = h.completeOrthogonalDecomposition().solve(r);
    if (!step.allFinite()) return false;
    for (int a = 0; a < d; ++a) {
      auto& e = eta[static_cast<std::size_t>(a)];
      e = std::clamp(e - step(a), V.lo(a), V.hi(a));
    }
  }
  return false;
}

struct VecHash {
  std::size_t operator()(const std::vector<long long>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (long long x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
    return h;
  }
};

std::optional<std::pair<Point, Point>> search_refutation(const PhaseModel& phase, const Box& V,
                                                         const UniformGrid& grid, double M2) {
  const int d = grid.dim();
  const std::size_t n = grid.size();
  std::vector<std::vector<double>> grads(n);
  double gscale = 1.0;
  for (std::size_t p = 0; p < n; ++p) {
    grads[p] = gradient_of(phase, grid.point(p));
    gscale = std::max(gscale, norm(grads[p]));
  }
  const double h = grid.spacing();
  const double cell = std::max(M2 * h, 1e-12 * gscale);
  const double min_sep = 4.0 * h * std::sqrt(static_cast<double>(d));

  std::unordered_map<std::vector<long long>, std::vector<std::size_t>, VecHash> buckets;
  auto key_of = [&](const std::vector<double>& g) {
    std::vector<long long> k(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) k[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(g[static_cast<std::size_t>(i)] / cell));
    return k;
  };
  for (std::size_t p = 0; p < n; ++p) buckets[key_of(grads[p])].push_back(p);

  struct Candidate {
    double gap;
    std::size_t p, q;
  };
  std::vector<Candidate> cands;
  const std::size_t kMaxCandidates = 20000;
  int offsets = 1;
  for (int i = 0; i < d; ++i) offsets *= 3;
  for (std::size_t p = 0; p < n && cands.size() < kMaxCandidates; ++p) {
    const auto base = key_of(grads[p]);
    for (int o = 0; o < offsets; ++o) {
      auto k = base;
      int code = o;
      for (int i = 0; i < d; ++i, code /= 3) k[static_cast<std::size_t>(i)] += code % 3 - 1;
      auto it = buckets.find(k);
      if (it == buckets.end()) continue;
      for (std::size_t q : it->second) {
        if (q <= p) continue;
        const Point xp = grid.point(p), xq = grid.point(q);
        if (distance(xp, xq) < min_sep) continue;
        std::vector<double> diff(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) diff[static_cast<std::size_t>(i)] = grads[p][static_cast<std::size_t>(i)] - grads[q][static_cast<std::size_t>(i)];
        cands.push_back({norm(diff), p, q});
        if (cands.size() >= kMaxCandidates) break;
      }
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.gap < b.gap; });

  const double tol = 1e-12 * gscale;
  const std::size_t attempts = std::min<std::size_t>(cands.size(), 200);
  for (std::size_t a = 0; a < attempts; ++a) {
    const Point xi = grid.point(cands[a].p);
    Point eta = grid.point(cands[a].q);
    if (!solve_gradient(phase, V, grads[cands[a].p], eta, tol)) continue;
    if (distance(xi, eta) < 1e-6 * std::max(V.diameter(), 1.0)) continue;
    return std::pair{xi, eta};
  }
  return std::nullopt;
}

InjectivityResult injectivity_from_scan(const PhaseModel& phase, const Box& V, const UniformGrid& grid,
                                        const Scan& scan, double M2, const AuditConstants& constants, int samples,
                                        std::uint64_t seed) {
  InjectivityResult res;
  const int d = phase.dim();
  const bool definite = scan.all_pd || scan.all_nd;
  const double a0 = scan.min_abs_det;
  if (definite && a0 > 0.0 && M2 > 0.0) {
    const double sign = scan.all_pd ? 1.0 : -1.0;
    res.monotonicity_constant = a0 / std::pow(constants.C_d * M2, d - 1);
    std::mt19937_64 rng(seed);
    res.min_observed_ratio = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
      const Point x = random_point(V, rng), y = random_point(V, rng);
      const double dist = distance(x, y);
      if (dist == 0.0) continue;
      const auto gx = gradient_of(phase, x), gy = gradient_of(phase, y);
      double dot = 0.0;
      for (int i = 0; i < d; ++i) {
        const auto k = static_cast<std::size_t>(i);
        dot += (gx[k] - gy[k]) * (x[k] - y[k]);
      }
      const double ratio = sign * dot / (dist * dist);
      res.min_observed_ratio = std::min(res.min_observed_ratio, ratio);
      ++res.pairs_tested;
      if (ratio < res.monotonicity_constant * (1.0 - 1e-9)) ++res.violations;
    }
    if (res.violations == 0 && res.pairs_tested > 0) {
      res.verdict = Verdict::verified;
      res.note = scan.all_pd ? "Hessian positive definite on the audit grid"
                             : "Hessian negative definite on the audit grid (-Phi is convex)";
      return res;
    }
    res.note = "definite Hessian on the grid but the monotonicity inequality failed on sampled pairs";
    return res;
  }
  res.witness = search_refutation(phase, V, grid, M2);
  if (res.witness) {
    res.verdict = Verdict::refuted;
    res.note = "distinct points with equal gradients";
  } else {
    res.note = "Hessian not definite and no gradient collision found";
  }
  return res;
}

}  // namespace

std::vector<double> compute_M(const PhaseModel& phase, const Box& V, int max_order, double grid_step, int threads) {
  check_max_order(max_order, std::min(phase.dim() + 2, kMaxJetOrder), "compute_M");
  const auto grid = UniformGrid::with_step(V, grid_step);
  const auto scan = scan_phase(phase, grid, max_order, threads);
  return summed_sups(scan.sup_abs, phase.dim(), 2, max_order);
}

std::vector<double> compute_N(const SymbolModel& symbol, int max_order, double grid_step, int threads) {
  check_max_order(max_order, std::min(symbol.dim() + 1, kMaxJetOrder), "compute_N");
  const auto grid = UniformGrid::with_step(symbol.support(), grid_step);
  const auto scan = scan_grid(grid, max_order, false, threads,
                              [&](const Point& x, int m) { return symbol.jet(x, m); });
  return summed_sups(scan.sup_abs, symbol.dim(), 0, max_order);
}

double compute_M3_third(const PhaseModel& phase, const Box& V, double grid_step, int threads) {
  const auto grid = UniformGrid::with_step(V, grid_step);
  return third_order_part(scan_phase(phase, grid, 3, threads).sup_abs, phase.dim());
}

A0Result compute_a0(const PhaseModel& phase, const Box& V, double grid_step, double degeneracy_threshold,
                    int threads) {
  const auto grid = UniformGrid::with_step(V, grid_step);
  const auto scan = scan_phase(phase, grid, 2, threads);
  A0Result r;
  r.min_abs_det = scan.min_abs_det;
  r.argmin = scan.argmin;
  r.degenerate = !(scan.min_abs_det >= degeneracy_threshold);
  r.a0 = r.degenerate ? 0.0 : scan.min_abs_det;
  return r;
}

double eigenvalue_floor(double a0, double M2, int d, double C_d) {
  if (!(a0 > 0.0)) throw DegeneratePhaseError("eigenvalue floor needs a0 > 0");
  if (!(M2 > 0.0) || !(C_d > 0.0)) throw ValidationError("eigenvalue floor needs M_2 > 0 and C_d > 0");
  return a0 / std::pow(C_d * M2, d - 1);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::verified:
      return "verified";
    case Verdict::refuted:
      return "refuted";
    case Verdict::undetermined:
      break;
  }
  return "undetermined";
}

InjectivityResult check_injectivity(const PhaseModel& phase, const Box& V, int samples,
                                    const InjectivityOptions& options) {
  if (samples < 2) throw ValidationError("check_injectivity needs at least 2 samples");
  const int d = phase.dim();
  const int pts = options.grid_points > 0 ? options.grid_points : default_audit_points(d);
  const auto grid = UniformGrid::with_points(V, pts);
  const auto scan = scan_phase(phase, grid, 2, options.threads);
  const double M2 = summed_sups(scan.sup_abs, d, 2, 2)[2];
  const auto constants = options.constants_set ? options.constants : AuditConstants::defaults(d);
  return injectivity_from_scan(phase, V, grid, scan, M2, constants, samples, options.seed);
}

double taylor_remainder_check(const PhaseModel& phase, const std::vector<std::pair<Point, Point>>& pairs, double M3) {
  const int d = phase.dim();
  double worst = 0.0;
  double scale = 0.0;
  std::vector<double> rnorm;
  std::vector<double> dist2;
  for (const auto& [x, y] : pairs) {
    const Jet jy = phase.jet(y, 2);
    const auto gx = gradient_of(phase, x);
    double r2 = 0.0, h2 = 0.0, g2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      double ri = gx[k] - jy.coeff(1 + k);
      g2 += gx[k] * gx[k];
      for (int j = 0; j < d; ++j) {
        MultiIndex m{};
        m[k]++;
        m[static_cast<std::size_t>(j)]++;
        ri -= jy.derivative(m) * (x[static_cast<std::size_t>(j)] - y[static_cast<std::size_t>(j)]);
      }
      r2 += ri * ri;
      h2 += (x[k] - y[k]) * (x[k] - y[k]);
    }
    if (h2 == 0.0) continue;
    scale = std::max(scale, std::sqrt(g2));
    rnorm.push_back(std::sqrt(r2));
    dist2.push_back(h2);
  }
  for (std::size_t i = 0; i < rnorm.size(); ++i) {
    if (M3 > 0.0) {
      worst = std::max(worst, rnorm[i] / (M3 * dist2[i]));
    } else if (rnorm[i] > 1e-12 * std::max(scale, 1.0)) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

HypothesisReport audit(const PhaseModel& phase, const SymbolModel& symbol, const AuditOptions& options) {
  const int d = phase.dim();
  if (symbol.dim() != d) throw ValidationError("phase and symbol dimensions differ");
  const Box& V = phase.domain();
  if (!V.strictly_contains(symbol.support())) throw ValidationError("supp b is not strictly inside V");

  HypothesisReport r;
  r.dim = d;
  r.phase_family = phase.family();
  r.symbol_family = symbol.family();
  r.constants = AuditConstants::defaults(d);
  if (options.C_d) r.constants.C_d = *options.C_d;
  if (options.C_prime_d) r.constants.C_prime_d = *options.C_prime_d;
  r.grid_points = options.grid_points > 0 ? options.grid_points : default_audit_points(d);

  const auto grid = UniformGrid::with_points(V, r.grid_points);
  r.audit_resolution = grid.spacing();
  const auto scan = scan_phase(phase, grid, d + 2, options.threads);
  r.M = summed_sups(scan.sup_abs, d, 2, d + 2);
  r.M3_third = third_order_part(scan.sup_abs, d);

  const auto kgrid = UniformGrid::with_points(symbol.support(), r.grid_points);
  const auto kscan = scan_grid(kgrid, d + 1, false, options.threads,
                               [&](const Point& x, int m) { return symbol.jet(x, m); });
  r.N = summed_sups(kscan.sup_abs, d, 0, d + 1);

  r.min_abs_det = scan.min_abs_det;
  r.degenerate = !(scan.min_abs_det >= options.degeneracy_threshold);
  r.a0 = r.degenerate ? 0.0 : scan.min_abs_det;
  r.min_abs_eigenvalue = scan.min_abs_eig;
  r.eigen_det_mismatch = scan.max_mismatch;
  r.positive_definite = scan.all_pd;
  r.negative_definite = scan.all_nd;

  if (!r.degenerate) {
    r.eigenvalue_floor = eigenvalue_floor(r.a0, r.M[2], d, r.constants.C_d);
    r.eigenvalue_floor_holds = r.min_abs_eigenvalue >= r.eigenvalue_floor * (1.0 - 1e-12);
  }

  r.injectivity = injectivity_from_scan(phase, V, grid, scan, r.M[2], r.constants, options.injectivity_samples,
                                        options.seed);

  std::mt19937_64 rng(options.seed + 1);
  std::vector<std::pair<Point, Point>> pairs;
  pairs.reserve(static_cast<std::size_t>(options.taylor_pairs));
  for (int i = 0; i < options.taylor_pairs; ++i) {
    Point x = random_point(V, rng);
    Point y = random_point(V, rng);
    pairs.emplace_back(std::move(x), std::move(y));
  }
  r.taylor_ratio = taylor_remainder_check(phase, pairs, r.M3_third);

  if (!r.degenerate) {
    const double cap = options.delta_cap ? *options.delta_cap : symbol.support().diameter();
    r.delta_capped = r.M3_third == 0.0;
    r.delta = compute_delta(r.a0, r.M[2], r.M3_third, d, r.constants.C_d, r.constants.C_prime_d,
                            cap > 0.0 ? cap : 1.0);
  }
  return r;
}

namespace {

std::vector<std::pair<std::string, std::string>> report_items(const HypothesisReport& r) {
  std::vector<std::pair<std::string, std::string>> items;
  auto num = [&](const std::string& k, double v) { items.emplace_back(k, format_double(v)); };
  auto flag = [&](const std::string& k, bool v) { items.emplace_back(k, v ? "true" : "false"); };
  items.emplace_back("phase_family", r.phase_family);
  items.emplace_back("symbol_family", r.symbol_family);
  num("d", r.dim);
  for (int k = 2; k < static_cast<int>(r.M.size()); ++k) num("M_" + std::to_string(k), r.M[static_cast<std::size_t>(k)]);
  num("M3_third_order", r.M3_third);
  for (int l = 0; l < static_cast<int>(r.N.size()); ++l) num("N_" + std::to_string(l), r.N[static_cast<std::size_t>(l)]);
  num("a0", r.a0);
  num("min_abs_det", r.min_abs_det);
  flag("degenerate", r.degenerate);
  num("eigenvalue_floor", r.eigenvalue_floor);
  num("min_abs_eigenvalue", r.min_abs_eigenvalue);
  flag("eigenvalue_floor_holds", r.eigenvalue_floor_holds);
  num("eigen_det_mismatch", r.eigen_det_mismatch);
  flag("positive_definite", r.positive_definite);
  flag("negative_definite", r.negative_definite);
  items.emplace_back("injective", to_string(r.injectivity.verdict));
  num("injectivity_pairs", static_cast<double>(r.injectivity.pairs_tested));
  num("injectivity_violations", static_cast<double>(r.injectivity.violations));
  if (r.injectivity.witness) {
    std::string w;
    for (double v : r.injectivity.witness->first) w += (w.empty() ? "" : " ") + format_double(v);
    w += " |";
    for (double v : r.injectivity.witness->second) w += " " + format_double(v);
    items.emplace_back("injectivity_witness", w);
  }
  num("taylor_ratio", r.taylor_ratio);
  num("delta", r.delta);
  flag("delta_capped", r.delta_capped);
  num("audit_resolution", r.audit_resolution);
  num("grid_points_per_axis", r.grid_points);
  num("C_d", r.constants.C_d);
  num("C_prime_d", r.constants.C_prime_d);
  return items;
}

}  // namespace

std::string to_key_value(const HypothesisReport& report) {
  std::ostringstream os;
  for (const auto& [k, v] : report_items(report)) os << k << " = " << v << '\n';
  return os.str();
}

CsvTable to_csv(const HypothesisReport& report) {
  CsvTable t({"name", "value"});
  for (auto& [k, v] : report_items(report)) t.add_row({k, v});
  return t;
}

}  // namespace statphase
