#include "statphase/quadrature.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "statphase/audit.hpp"
#include "statphase/errors.hpp"

namespace statphase {

namespace {

struct Rule {
  std::vector<double> nodes, weights;  // on [-1, 1]
};

template <std::size_t Q>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, Q>;
  Rule r;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) {
      r.nodes.push_back(0.0);
      r.weights.push_back(w[k]);
      continue;
    }
    r.nodes.push_back(-a[k]);
    r.weights.push_back(w[k]);
    r.nodes.push_back(a[k]);
    r.weights.push_back(w[k]);
  }
  return r;
}

const Rule& high_rule() {
  static const Rule r = make_rule<30>();
  return r;
}

const Rule& low_rule() {
  static const Rule r = make_rule<25>();
  return r;
}

inline void neumaier(double& s, double& c, double v) {
  const double t = s + v;
  c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
  s = t;
}

inline void neumaier(std::complex<double>& s, std::complex<double>& c, std::complex<double> v) {
  auto* sp = reinterpret_cast<double*>(&s);
  auto* cp = reinterpret_cast<double*>(&c);
  neumaier(sp[0], cp[0], v.real());
  neumaier(sp[1], cp[1], v.imag());
}

long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

struct Entry {
  std::uint32_t k;
  std::complex<double> high, low;
  double magnitude;
};

struct Leaf {
  std::vector<double> lo, hi;
  std::vector<Entry> entries;
  double err = 0.0;
};

std::complex<double> phase_factor(double lambda, double phi) {
  return {std::cos(lambda * phi), std::sin(lambda * phi)};
}

void require_inside(const PhaseModel& phase, const Box& K) {
  if (phase.dim() != K.dim()) throw ValidationError("phase and symbol dimensions differ");
  if (!phase.domain().contains(K.lo()) || !phase.domain().contains(K.hi())) {
    throw DomainError("supp b must lie inside the phase domain");
  }
}

}  // namespace

namespace detail {
struct QuadratureSlot {
  std::complex<double> high, high_c, low, low_c;
  double magnitude = 0.0, magnitude_c = 0.0;
};

struct PanelScratch {
  std::vector<QuadratureSlot> slots;
  std::vector<std::uint32_t> touched;
  std::vector<char> flag;
};
}  // namespace detail

void QuadratureSink::add(std::size_t component, std::complex<double> value) {
  auto& sc = *scratch_;
  if (!sc.flag[component]) {
    sc.flag[component] = 1;
    sc.touched.push_back(static_cast<std::uint32_t>(component));
  }
  auto& s = sc.slots[component];
  if (high_) {
    neumaier(s.high, s.high_c, weight_ * value);
    neumaier(s.magnitude, s.magnitude_c, weight_ * std::abs(value));
  } else {
    neumaier(s.low, s.low_c, weight_ * value);
  }
}

namespace {

void run_rule(const Rule& rule, const Leaf& leaf, const VectorIntegrand& f, detail::PanelScratch& sc, bool high,
              std::vector<double>& x, std::vector<int>& idx) {
  const int d = static_cast<int>(leaf.lo.size());
  const int q = static_cast<int>(rule.nodes.size());
  std::fill(idx.begin(), idx.end(), 0);
  double scale = 1.0;
  for (int i = 0; i < d; ++i) scale *= 0.5 * (leaf.hi[static_cast<std::size_t>(i)] - leaf.lo[static_cast<std::size_t>(i)]);
  while (true) {
    double w = scale;
    for (int i = 0; i < d; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const auto k = static_cast<std::size_t>(idx[ii]);
      const double mid = 0.5 * (leaf.lo[ii] + leaf.hi[ii]), half = 0.5 * (leaf.hi[ii] - leaf.lo[ii]);
      x[ii] = mid + half * rule.nodes[k];
      w *= rule.weights[k];
    }
    QuadratureSink sink(sc, w, high);
    f(x, sink);
    int axis = 0;
    while (axis < d && ++idx[static_cast<std::size_t>(axis)] == q) idx[static_cast<std::size_t>(axis++)] = 0;
    if (axis == d) break;
  }
}

void evaluate_leaf(Leaf& leaf, const VectorIntegrand& f, detail::PanelScratch& sc, std::size_t monitored) {
  const std::size_t d = leaf.lo.size();
  std::vector<double> x(d);
  std::vector<int> idx(d);
  run_rule(high_rule(), leaf, f, sc, true, x, idx);
  run_rule(low_rule(), leaf, f, sc, false, x, idx);
  std::sort(sc.touched.begin(), sc.touched.end());
  leaf.entries.clear();
  leaf.err = 0.0;
  for (std::uint32_t k : sc.touched) {
    auto& s = sc.slots[k];
    Entry e{k, s.high + s.high_c, s.low + s.low_c, s.magnitude + s.magnitude_c};
    if (k < monitored) leaf.err += std::abs(e.high - e.low);
    leaf.entries.push_back(e);
    s = {};
    sc.flag[k] = 0;
  }
  sc.touched.clear();
}

void evaluate_leaves(std::vector<Leaf>& leaves, std::size_t begin, const VectorIntegrand& f, std::size_t components,
                     std::size_t monitored, int threads) {
  const std::size_t n = leaves.size() - begin;
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  auto work = [&](std::size_t w) {
    detail::PanelScratch sc;
    sc.slots.assign(components, {});
    sc.flag.assign(components, 0);
    for (std::size_t i = w; i < n; i += workers) evaluate_leaf(leaves[begin + i], f, sc, monitored);
  };
  if (workers == 1 || n < 2) {
    work(0);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

QuadratureOutcome integrate_box(const Box& box, std::size_t components, const VectorIntegrand& f,
                                std::span<const int> panels, const QuadratureOptions& options, std::size_t monitored) {
  const int d = box.dim();
  if (d < 1) throw ValidationError("integration box must have dimension >= 1");
  if (components == 0) throw ValidationError("at least one component is required");
  if (static_cast<int>(panels.size()) != d) throw ValidationError("one panel count per axis is required");
  monitored = std::clamp<std::size_t>(monitored, 1, components);
  const long per_panel = ipow(static_cast<long>(high_rule().nodes.size()), d) +
                         ipow(static_cast<long>(low_rule().nodes.size()), d);

  // Starting mesh, leaves in lexicographic order.
  std::vector<Leaf> leaves;
  {
    std::vector<int> n(panels.begin(), panels.end());
    for (auto& v : n) v = std::max(1, v);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Leaf l;
      l.lo.resize(static_cast<std::size_t>(d));
      l.hi.resize(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double step = box.width(i) / n[ii];
        l.lo[ii] = box.lo(i) + idx[ii] * step;
        l.hi[ii] = idx[ii] + 1 == n[ii] ? box.hi(i) : box.lo(i) + (idx[ii] + 1) * step;
      }
      leaves.push_back(std::move(l));
      int axis = 0;
      while (axis < d && ++idx[static_cast<std::size_t>(axis)] == n[static_cast<std::size_t>(axis)]) idx[static_cast<std::size_t>(axis++)] = 0;
      if (axis == d) break;
    }
  }
  QuadratureOutcome out;
  if (static_cast<long>(leaves.size()) * per_panel > options.max_evaluations) {
    throw AccuracyError("starting mesh exceeds the evaluation cap", {}, std::numeric_limits<double>::infinity());
  }
  evaluate_leaves(leaves, 0, f, components, monitored, options.threads);
  out.evaluations = static_cast<long>(leaves.size()) * per_panel;

  while (true) {
    ++out.levels;
    // Totals in leaf order.
    std::vector<std::complex<double>> hi(components), hi_c(components);
    std::vector<double> mag(components), mag_c(components), err(components);
    double total_err = 0.0;
    for (const auto& l : leaves) {
      total_err += l.err;
      for (const auto& e : l.entries) {
        neumaier(hi[e.k], hi_c[e.k], e.high);
        neumaier(mag[e.k], mag_c[e.k], e.magnitude);
        err[e.k] += std::abs(e.high - e.low);
      }
    }
    out.values.resize(components);
    out.magnitudes.resize(components);
    for (std::size_t k = 0; k < components; ++k) {
      out.values[k] = hi[k] + hi_c[k];
      out.magnitudes[k] = mag[k] + mag_c[k];
    }
    out.errors = err;
    out.panels = leaves.size();
    const double tol = std::max({options.rel_tol * std::abs(out.values[0]), options.abs_tol, 1e-14 * out.magnitudes[0]});
    if (total_err <= tol) return out;

    // Split the largest-error leaves until what is left unsplit is below half the tolerance.
    std::vector<std::size_t> order(leaves.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return leaves[a].err > leaves[b].err; });
    std::vector<std::size_t> split;
    double rest = total_err;
    for (std::size_t i : order) {
      if (rest <= 0.5 * tol || leaves[i].err == 0.0) break;
      split.push_back(i);
      rest -= leaves[i].err;
    }
    std::sort(split.begin(), split.end());
    const long children = static_cast<long>(split.size()) << d;
    if (out.evaluations + children * per_panel > options.max_evaluations) {
      std::ostringstream msg;
      msg << "quadrature did not converge within " << options.max_evaluations << " evaluations (error estimate "
          << total_err << ", tolerance " << tol << ")";
      throw AccuracyError(msg.str(), out.values[0], total_err);
    }
    const std::size_t first_new = leaves.size();
    for (std::size_t i : split) {
      const Leaf parent = leaves[i];
      for (int c = 0; c < (1 << d); ++c) {
        Leaf l;
        l.lo = parent.lo;
        l.hi = parent.hi;
        for (int a = 0; a < d; ++a) {
          const auto aa = static_cast<std::size_t>(a);
          const double m = 0.5 * (parent.lo[aa] + parent.hi[aa]);
          if (c & (1 << a)) l.lo[aa] = m;
          else l.hi[aa] = m;
        }
        if (c == 0) leaves[i] = std::move(l);
        else leaves.push_back(std::move(l));
      }
    }
    // Re-evaluate the replaced parents in place and the appended children.
    std::vector<Leaf> fresh;
    fresh.reserve(split.size());
    for (std::size_t i : split) fresh.push_back(std::move(leaves[i]));
    evaluate_leaves(fresh, 0, f, components, monitored, options.threads);
    for (std::size_t k = 0; k < split.size(); ++k) leaves[split[k]] = std::move(fresh[k]);
    evaluate_leaves(leaves, first_new, f, components, monitored, options.threads);
    out.evaluations += children * per_panel;
  }
}

std::string to_string(IntegralMethod m) {
  switch (m) {
    case IntegralMethod::oracle:
      return "oracle";
    case IntegralMethod::decomposition:
      return "decomposition";
    case IntegralMethod::decomposition_single_ball:
      return "decomposition_single_ball";
  }
  return "unknown";
}

std::vector<int> oscillation_panels(const PhaseModel& phase, const Box& box, double lambda) {
  const int d = box.dim();
  const int m = 9;
  double G = 0.0;
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = box.lo(i) + box.width(i) * idx[static_cast<std::size_t>(i)] / (m - 1);
    const Jet j = phase.jet_unchecked(x, 1);
    double g2 = 0.0;
    for (int i = 0; i < d; ++i) g2 += j.coeff(static_cast<std::size_t>(1 + i)) * j.coeff(static_cast<std::size_t>(1 + i));
    G = std::max(G, std::sqrt(g2));
    int axis = 0;
    while (axis < d && ++idx[static_cast<std::size_t>(axis)] == m) idx[static_cast<std::size_t>(axis++)] = 0;
    if (axis == d) break;
  }
  std::vector<int> n(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double osc = lambda * G * box.width(i) / (2.0 * std::numbers::pi);
    n[static_cast<std::size_t>(i)] = static_cast<int>(std::clamp(std::ceil(osc / 3.0), 2.0, 1e6));
  }
  return n;
}

namespace {

std::vector<int> starting_panels(const PhaseModel& phase, const Box& K, double lambda, const QuadratureOptions& o) {
  if (o.initial_panels > 0) return std::vector<int>(static_cast<std::size_t>(K.dim()), o.initial_panels);
  return oscillation_panels(phase, K, lambda);
}

void finish(OscillatoryIntegralResult& r) {
  r.trivial_bound_holds = std::abs(r.value) <= r.symbol_mass * (1.0 + 1e-9) + r.error_estimate;
}

}  // namespace

OscillatoryIntegralResult oracle_integral(const PhaseModel& phase, const SymbolModel& symbol, double lambda,
                                          const QuadratureOptions& options) {
  const Box& K = symbol.support();
  require_inside(phase, K);
  if (K.dim() > 3) throw CapabilityError("oracle quadrature supports d <= 3");
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");

  VectorIntegrand f = [&](std::span<const double> x, QuadratureSink& sink) {
    const double b = symbol.value(x);
    if (b == 0.0) return;
    sink.add(0, phase_factor(lambda, phase.value_unchecked(x)) * b);
  };
  const auto q = integrate_box(K, 1, f, starting_panels(phase, K, lambda, options), options);

  OscillatoryIntegralResult r;
  r.lambda = lambda;
  r.method = IntegralMethod::oracle;
  r.value = q.values[0];
  r.error_estimate = q.errors[0];
  r.symbol_mass = q.magnitudes[0];
  r.evaluations = q.evaluations;
  r.panels = q.panels;
  r.J = 1;
  r.N = 0;
  finish(r);
  return r;
}

std::vector<std::complex<double>> partitioned_oracle_integrals(const PhaseModel& phase, const SymbolModel& symbol,
                                                               double lambda, const PartitionOfUnity& partition,
                                                               const QuadratureOptions& options) {
  const Box& K = symbol.support();
  require_inside(phase, K);
  const int d = K.dim();
  std::vector<std::complex<double>> out(partition.size());
  std::vector<std::pair<std::size_t, Jet>> chis;
  for (std::size_t j = 0; j < partition.size(); ++j) {
    Point lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    bool empty = false;
    for (int i = 0; i < d; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      lo[ii] = std::max(K.lo(i), partition.center(j)[ii] - partition.delta());
      hi[ii] = std::min(K.hi(i), partition.center(j)[ii] + partition.delta());
      empty = empty || !(lo[ii] < hi[ii]);
    }
    if (empty) continue;
    const Box ball_box(lo, hi);
    VectorIntegrand f = [&](std::span<const double> x, QuadratureSink& sink) {
      const double b = symbol.value(x);
      if (b == 0.0) return;
      thread_local std::vector<std::pair<std::size_t, Jet>> w;
      partition.weight_jets(x, 0, w);
      for (const auto& [k, jet] : w) {
        if (k == j) sink.add(0, phase_factor(lambda, phase.value_unchecked(x)) * (jet.value() * b));
      }
    };
    out[j] = integrate_box(ball_box, 1, f, starting_panels(phase, ball_box, lambda, options), options).values[0];
  }
  return out;
}

OscillatoryIntegralResult decomposition_integral(const PhaseModel& phase, const SymbolModel& symbol, double lambda,
                                                 const PartitionOfUnity& partition,
                                                 const DecompositionOptions& options) {
  const Box& K = symbol.support();
  require_inside(phase, K);
  const int d = K.dim();
  if (d > 3) throw CapabilityError("decomposition quadrature supports d <= 3");
  if (partition.dim() != d) throw ValidationError("partition dimension differs from the symbol");
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  const int N = options.N > 0 ? options.N : d + 1;
  if (N + 1 > kMaxJetOrder) throw CapabilityError("N exceeds the jet order cap");

  OscillatoryIntegralResult r;
  double a0 = 0.0;
  if (options.a0) {
    a0 = *options.a0;
  } else {
    const Box& V = phase.domain();
    double w = 0.0;
    for (int i = 0; i < d; ++i) w = std::max(w, V.width(i));
    a0 = compute_a0(phase, V, w / 40.0).a0;
  }
  if (!(a0 > 0.0)) throw HypothesisError("decomposition requires a non-degenerate phase (a0 > 0)");
  const double sl = std::sqrt(lambda);
  if (sl * a0 < 1.0) {
    std::ostringstream msg;
    msg << "lambda^(1/2) a0 = " << sl * a0 << " < 1";
    r.warnings.push_back(msg.str());
  }

  const std::size_t J = partition.size();
  const std::size_t comps = 3 + 2 * J;
  const std::complex<double> pref = std::pow(std::complex<double>(0.0, 1.0 / lambda), N);
  const Cutoff psi_fn = options.cutoff;

  VectorIntegrand f = [&](std::span<const double> x, QuadratureSink& sink) {
    const Jet b = symbol.jet(x, N);
    if (b.is_zero()) return;
    const Jet phi = phase.jet_unchecked(x, N + 1);
    double g2 = 0.0;
    for (int i = 0; i < d; ++i) g2 += phi.coeff(static_cast<std::size_t>(1 + i)) * phi.coeff(static_cast<std::size_t>(1 + i));
    const double rr = sl * std::sqrt(g2);
    const std::complex<double> e = phase_factor(lambda, phi.value());
    thread_local std::vector<std::pair<std::size_t, Jet>> chis;
    partition.weight_jets(x, N, chis);
    if (rr <= 1.0) {
      for (const auto& [j, chi] : chis) {
        const std::complex<double> k = e * (chi.value() * b.value());
        sink.add(0, k);
        sink.add(1, k);
        sink.add(3 + 2 * j, k);
      }
      return;
    }
    const Jet psi = rr >= 2.0 ? Jet(d, N) : cutoff_of_gradient(phi, sl, psi_fn);
    const Jet one_minus = 1.0 - psi;
    const auto cj = transpose_power_coeff_jets(phi, N, 0);
    thread_local std::vector<double> c;
    c.resize(cj.size());
    for (std::size_t k = 0; k < cj.size(); ++k) c[k] = cj[k].value();
    const Jet ob = one_minus * b;
    for (const auto& [j, chi] : chis) {
      if (psi.value() != 0.0) {
        const std::complex<double> k = e * (psi.value() * chi.value() * b.value());
        sink.add(0, k);
        sink.add(1, k);
        sink.add(3 + 2 * j, k);
      }
      const std::complex<double> l = e * pref * contract(c, N, ob * chi);
      sink.add(0, l);
      sink.add(2, l);
      sink.add(4 + 2 * j, l);
    }
  };
  const auto q = integrate_box(K, comps, f, starting_panels(phase, K, lambda, options.quadrature), options.quadrature, 3);

  r.lambda = lambda;
  r.method = J == 1 ? IntegralMethod::decomposition_single_ball : IntegralMethod::decomposition;
  r.value = q.values[0];
  r.error_estimate = q.errors[0];
  r.K_total = q.values[1];
  r.L_total = q.values[2];
  r.evaluations = q.evaluations;
  r.panels = q.panels;
  r.J = J;
  r.N = N;
  r.balls.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    r.balls[j] = {j, q.values[3 + 2 * j], q.values[4 + 2 * j], q.errors[3 + 2 * j], q.errors[4 + 2 * j]};
  }
  // int |b| on the same grid for the trivial bound.
  VectorIntegrand mass = [&](std::span<const double> x, QuadratureSink& sink) { sink.add(0, std::abs(symbol.value(x))); };
  QuadratureOptions mo = options.quadrature;
  mo.initial_panels = 0;
  r.symbol_mass = integrate_box(K, 1, mass, std::vector<int>(static_cast<std::size_t>(d), 2), mo).values[0].real();
  finish(r);
  return r;
}

NearStationaryMeasure near_stationary_measure(const PhaseModel& phase, double lambda, const Box& region, long samples,
                                              std::uint64_t seed) {
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (samples < 1) throw ValidationError("samples must be positive");
  const int d = region.dim();
  if (phase.dim() != d) throw ValidationError("phase and region dimensions differ");
  NearStationaryMeasure out;
  out.threshold = 2.0 / std::sqrt(lambda);
  out.samples = samples;

  auto grad_hess = [&](std::span<const double> x, double& gnorm, double& hnorm) {
    const Jet j = phase.jet_unchecked(x, 2);
    const auto& sp = JetSpace::get(d);
    double g2 = 0.0, h2 = 0.0;
    for (int i = 0; i < d; ++i) g2 += j.coeff(static_cast<std::size_t>(1 + i)) * j.coeff(static_cast<std::size_t>(1 + i));
    for (std::size_t idx = static_cast<std::size_t>(1 + d); idx < sp.size(2); ++idx) {
      const double v = j.derivative_at(idx);
      h2 += sp.multiplicity(idx) * v * v;
    }
    gnorm = std::sqrt(g2);
    hnorm = std::sqrt(h2);
  };

  auto for_cells = [&](const std::vector<long>& m, auto&& fn) {
    std::vector<long> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> c(static_cast<std::size_t>(d));
    while (true) {
      for (int i = 0; i < d; ++i) {
        c[static_cast<std::size_t>(i)] =
            region.lo(i) + region.width(i) * (static_cast<double>(idx[static_cast<std::size_t>(i)]) + 0.5) /
                               static_cast<double>(m[static_cast<std::size_t>(i)]);
      }
      fn(idx, c);
      int axis = 0;
      while (axis < d && ++idx[static_cast<std::size_t>(axis)] == m[static_cast<std::size_t>(axis)]) idx[static_cast<std::size_t>(axis++)] = 0;
      if (axis == d) break;
    }
  };

  // Lipschitz constant of grad Phi from a coarse pass.
  double lip = 0.0;
  {
    std::vector<long> m(static_cast<std::size_t>(d), 32);
    for_cells(m, [&](const std::vector<long>&, const std::vector<double>& c) {
      double g, h;
      grad_hess(c, g, h);
      lip = std::max(lip, h);
    });
    lip = 2.0 * lip + 1e-12;
  }
  const double cap_cells = 1e6;
  const long per_axis_cap = static_cast<long>(std::floor(std::pow(cap_cells, 1.0 / d)));
  std::vector<long> m(static_cast<std::size_t>(d));
  std::vector<double> cell(static_cast<std::size_t>(d));
  double half_diag = 0.0;
  for (int i = 0; i < d; ++i) {
    const double want = lip * region.width(i) * std::sqrt(static_cast<double>(d)) / (8.0 * out.threshold);
    m[static_cast<std::size_t>(i)] = std::clamp(static_cast<long>(std::ceil(want)), 8L, per_axis_cap);
    cell[static_cast<std::size_t>(i)] = region.width(i) / static_cast<double>(m[static_cast<std::size_t>(i)]);
    half_diag += 0.25 * cell[static_cast<std::size_t>(i)] * cell[static_cast<std::size_t>(i)];
  }
  half_diag = std::sqrt(half_diag);
  double cell_volume = 1.0;
  for (double w : cell) cell_volume *= w;

  std::vector<std::vector<double>> candidates;
  for_cells(m, [&](const std::vector<long>&, const std::vector<double>& c) {
    double g, h;
    grad_hess(c, g, h);
    if (g <= out.threshold + lip * half_diag) candidates.push_back(c);
  });
  out.candidate_volume = cell_volume * static_cast<double>(candidates.size());
  if (candidates.empty()) return out;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (long s = 0; s < samples; ++s) {
    const auto& c = candidates[pick(rng)];
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] + u(rng) * cell[static_cast<std::size_t>(i)];
    double g, h;
    grad_hess(x, g, h);
    if (g <= out.threshold) ++out.hits;
  }
  const double p = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.measure = out.candidate_volume * p;
  out.standard_error = out.candidate_volume * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return out;
}

CsvTable integral_csv(const std::vector<OscillatoryIntegralResult>& results) {
  CsvTable t({"lambda", "method", "re", "im", "abs", "error_estimate", "J", "N"});
  for (const auto& r : results) {
    t.add_row({format_double(r.lambda), to_string(r.method), format_double(r.value.real()), format_double(r.value.imag()),
               format_double(std::abs(r.value)), format_double(r.error_estimate), std::to_string(r.J),
               std::to_string(r.N)});
  }
  return t;
}

}  // namespace statphase
