#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "statphase/audit.hpp"
#include "statphase/errors.hpp"
#include "statphase/ibp.hpp"
#include "statphase/partition.hpp"

namespace statphase::cli {

namespace {

namespace fs = std::filesystem;

void write_table(const RunContext& ctx, const std::string& command, const std::string& name, CsvTable table) {
  for (const auto& line : provenance_lines(ctx.config, command)) table.add_comment(line);
  fs::create_directories(ctx.out);
  const auto path = ctx.out / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  table.write(os);
  if (ctx.log) *ctx.log << "wrote " << path.string() << "\n";
}

void write_text(const RunContext& ctx, const std::string& command, const std::string& name, const std::string& body) {
  fs::create_directories(ctx.out);
  const auto path = ctx.out / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  for (const auto& line : provenance_lines(ctx.config, command)) os << "# " << line << "\n";
  os << body;
  if (ctx.log) *ctx.log << "wrote " << path.string() << "\n";
}

std::string fmt(double v) { return format_double(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

AuditOptions audit_options(const RunContext& ctx) {
  const auto& o = ctx.config.overrides;
  AuditOptions a;
  if (o.audit_grid_points) a.grid_points = *o.audit_grid_points;
  a.C_d = o.C_d;
  a.C_prime_d = o.C_prime_d;
  a.delta_cap = o.delta_cap;
  a.seed = ctx.config.seed;
  a.threads = ctx.threads;
  return a;
}

QuadratureOptions quadrature_options(const RunContext& ctx) {
  QuadratureOptions q;
  q.rel_tol = ctx.config.overrides.rel_tol;
  q.max_evaluations = static_cast<std::size_t>(ctx.config.overrides.max_evaluations);
  q.threads = ctx.threads;
  return q;
}

DecompositionOptions decomposition_options(const RunContext& ctx, const HypothesisReport& report) {
  DecompositionOptions d;
  d.quadrature = quadrature_options(ctx);
  if (ctx.config.overrides.N) d.N = *ctx.config.overrides.N;
  if (report.passed()) d.a0 = report.a0;
  return d;
}

double partition_delta(const RunContext& ctx, const HypothesisReport& report) {
  return ctx.config.overrides.delta ? *ctx.config.overrides.delta : report.delta;
}

/// Audit gate shared by the commands that need the hypotheses.
bool gate(const RunContext& ctx, const HypothesisReport& report, const char* command) {
  if (report.passed()) return true;
  if (ctx.log) {
    *ctx.log << command << ": phase is degenerate on V (min |det Hess| = " << report.min_abs_det << ")"
             << (ctx.force ? ", continuing because of --force" : "; rerun with --force to continue") << "\n";
  }
  return ctx.force;
}

}  // namespace

int cmd_audit(const RunContext& ctx) {
  const auto phase = ctx.config.make_phase();
  const auto symbol = ctx.config.make_symbol();
  const auto report = audit(phase, symbol, audit_options(ctx));
  write_table(ctx, "audit", "audit.csv", to_csv(report));
  write_text(ctx, "audit", "audit.txt", to_key_value(report));
  if (report.passed()) {
    try {
      write_table(ctx, "audit", "cover.csv", cover_csv(PartitionOfUnity::lattice(symbol.support(), partition_delta(ctx, report))));
    } catch (const ResourceError& e) {
      if (ctx.log) *ctx.log << "audit: cover not written: " << e.what() << "\n";
    }
  }
  if (ctx.log) {
    *ctx.log << "audit: a0 = " << report.a0 << ", M_2 = " << report.M[2] << ", delta = " << report.delta
             << ", injectivity " << to_string(report.injectivity.verdict)
             << (report.passed() ? "" : ", DEGENERATE") << "\n";
  }
  return report.passed() ? kOk : kHypothesis;
}

int cmd_evaluate(const RunContext& ctx) {
  const auto phase = ctx.config.make_phase();
  const auto symbol = ctx.config.make_symbol();
  const auto report = audit(phase, symbol, audit_options(ctx));
  if (!gate(ctx, report, "evaluate")) return kHypothesis;

  const std::vector<double> lambdas = ctx.lambda ? std::vector<double>{*ctx.lambda} : ctx.config.lambda.values();
  for (double l : lambdas) {
    if (!(l >= 1.0)) throw ConfigError("lambda must be at least 1");
  }
  CsvTable t({"lambda", "method", "re", "im", "abs", "error_estimate", "J", "N", "status"});
  for (double lambda : lambdas) {
    for (auto m : ctx.config.methods) {
      std::string status = "ok";
      OscillatoryIntegralResult r;
      r.lambda = lambda;
      r.method = m;
      try {
        if (m == IntegralMethod::oracle) {
          r = oracle_integral(phase, symbol, lambda, quadrature_options(ctx));
        } else {
          const auto p = m == IntegralMethod::decomposition
                             ? PartitionOfUnity::lattice(symbol.support(), partition_delta(ctx, report))
                             : PartitionOfUnity::single_ball(symbol.support());
          r = decomposition_integral(phase, symbol, lambda, p, decomposition_options(ctx, report));
        }
        if (!r.warnings.empty()) status = "warning";
      } catch (const AccuracyError& e) {
        status = "accuracy_cap";
        r.value = e.best_value;
        r.error_estimate = e.last_delta;
      } catch (const HypothesisError&) {
        status = "hypothesis_error";
        r.value = {std::nan(""), std::nan("")};
      }
      t.add_row({fmt(lambda), to_string(m), fmt(r.value.real()), fmt(r.value.imag()), fmt(std::abs(r.value)),
                 fmt(r.error_estimate), std::to_string(r.J), std::to_string(r.N), status});
      if (ctx.log) *ctx.log << "evaluate: lambda = " << lambda << " " << to_string(m) << " |I| = " << std::abs(r.value)
                            << " (" << status << ")\n";
    }
  }
  write_table(ctx, "evaluate", "evaluate.csv", std::move(t));
  return kOk;
}

int cmd_sweep(const RunContext& ctx) {
  const auto phase = ctx.config.make_phase();
  const auto symbol = ctx.config.make_symbol();
  const auto report = audit(phase, symbol, audit_options(ctx));
  if (!gate(ctx, report, "sweep")) return kHypothesis;
  const auto lambdas = ctx.config.lambda.values();
  const double C = ctx.config.overrides.calibration_C.value_or(1.0);

  for (auto m : ctx.config.methods) {
    SweepOptions o;
    o.method = m;
    o.quadrature = quadrature_options(ctx);
    o.decomposition = decomposition_options(ctx, report);
    o.tail_fraction = ctx.config.sweep.tail_fraction;
    o.residual_threshold = ctx.config.sweep.residual_threshold;
    if (m == IntegralMethod::decomposition) o.delta = partition_delta(ctx, report);
    const auto sweep = decay_sweep(phase, symbol, lambdas, o);
    const std::string tag = to_string(m);

    std::optional<BoundFormula> formula;
    if (report.passed()) formula = BoundFormula::from_report(report, ctx.config.sweep.bound, C);
    write_table(ctx, "sweep", "sweep_" + tag + ".csv", sweep_csv(sweep, formula));
    write_table(ctx, "sweep", "fit_" + tag + ".csv", fit_csv(sweep.fit));

    if (report.passed()) {
      CsvTable ratios({"variant", "C", "prefactor", "plateau", "max_ratio", "exceeds"});
      for (auto v : {BoundVariant::thm1, BoundVariant::thm2}) {
        const auto r = bound_ratio_report(sweep, BoundFormula::from_report(report, v, C));
        ratios.add_row({to_string(v), fmt(C), fmt(r.formula.prefactor()), fmt(r.plateau), fmt(r.max_ratio), flag(r.exceeds)});
      }
      write_table(ctx, "sweep", "bound_ratio_" + tag + ".csv", std::move(ratios));
    }
    if (ctx.log) {
      *ctx.log << "sweep " << tag << ": slope " << (sweep.fit.defined ? fmt(sweep.fit.slope) : "undefined")
               << " (expected " << -0.5 * phase.dim() << "), plateau " << sweep.plateau << "\n";
    }
  }
  return kOk;
}

int cmd_dispersive(const RunContext& ctx) {
  const auto symbol = ctx.config.make_symbol();
  const auto& s = ctx.config.dispersive;
  DispersiveOptions o;
  o.theta = s.theta;
  o.x = s.x;
  o.y = s.y;
  o.quadrature = quadrature_options(ctx);
  o.fit_t_min_factor = s.fit_t_min_factor;
  o.residual_threshold = ctx.config.sweep.residual_threshold;
  const auto r = dispersive_experiment(symbol, ctx.config.domain, s.t.values(), s.lambda, o);
  write_table(ctx, "dispersive", "dispersive.csv", dispersive_csv(r));
  write_table(ctx, "dispersive", "dispersive_fit.csv", fit_csv(r.fit));
  if (ctx.log) {
    *ctx.log << "dispersive: slope " << (r.fit.defined ? fmt(r.fit.slope) : "undefined") << " (expected "
             << -0.5 * symbol.dim() << "), envelope constant " << r.envelope_constant << "\n";
  }
  return kOk;
}

int cmd_rescale_check(const RunContext& ctx) {
  const auto phase = ctx.config.make_phase();
  const auto symbol = ctx.config.make_symbol();
  RescalingOptions o;
  o.quadrature = quadrature_options(ctx);
  if (ctx.config.overrides.audit_grid_points) o.grid_points = *ctx.config.overrides.audit_grid_points;
  o.threads = ctx.threads;
  std::vector<RescalingReport> reports;
  for (double t : ctx.config.rescale.t) {
    reports.push_back(rescaling_check(phase, symbol, ctx.config.rescale.lambda, t, o));
    if (ctx.log) *ctx.log << "rescale-check: t = " << t << " discrepancy " << reports.back().discrepancy << "\n";
  }
  write_table(ctx, "rescale-check", "rescaling.csv", rescaling_csv(reports));
  return kOk;
}

int cmd_verify_lemmas(const RunContext& ctx) {
  const auto phase = ctx.config.make_phase();
  const auto symbol = ctx.config.make_symbol();
  const auto& s = ctx.config.lemmas;

  CsvTable lemmas({"N", "samples", "ai_ratio", "ai_points", "nablaphi_ratio", "nablaphi_points", "ltranspose_ratio",
                   "ltranspose_points"});
  LemmaBoundOptions lo;
  lo.beta_max = s.beta_max;
  lo.grad_min = s.grad_min;
  lo.grad_max = s.grad_max;
  lo.seed = ctx.config.seed;
  for (int N : s.N) {
    for (int samples : {s.samples, 4 * s.samples}) {
      const auto r = verify_coefficient_bounds(phase, ctx.config.domain, N, samples, lo);
      lemmas.add_row({std::to_string(N), std::to_string(samples), fmt(r.ai_ratio), std::to_string(r.ai_points),
                      fmt(r.nablaphi_ratio), std::to_string(r.nablaphi_points), fmt(r.ltranspose_ratio),
                      std::to_string(r.ltranspose_points)});
    }
  }
  write_table(ctx, "verify-lemmas", "lemmas.csv", std::move(lemmas));

  const auto report = audit(phase, symbol, audit_options(ctx));
  if (!gate(ctx, report, "verify-lemmas")) return kHypothesis;
  if (!report.passed()) return kOk;

  const auto p = PartitionOfUnity::lattice(symbol.support(), partition_delta(ctx, report));
  const auto inj = check_local_injectivity(phase, p, report.a0, report.M[2], report.constants.C_d, s.injectivity_pairs,
                                           ctx.config.seed);
  CsvTable injectivity({"J", "delta", "constant", "pairs", "violations", "min_ratio"});
  injectivity.add_row({std::to_string(p.size()), fmt(p.delta()), fmt(inj.constant), std::to_string(inj.pairs),
                       std::to_string(inj.violations), fmt(inj.min_ratio)});
  write_table(ctx, "verify-lemmas", "injectivity.csv", std::move(injectivity));

  const int d = phase.dim();
  CsvTable near({"lambda", "threshold", "measure", "standard_error", "scale", "ratio"});
  for (double lambda : ctx.config.lambda.values()) {
    const auto m = near_stationary_measure(phase, lambda, symbol.support(), ctx.config.overrides.near_stationary_samples,
                                           ctx.config.seed);
    const double scale = std::pow(lambda, -0.5 * d) / report.a0;
    near.add_row({fmt(lambda), fmt(m.threshold), fmt(m.measure), fmt(m.standard_error), fmt(scale), fmt(m.measure / scale)});
  }
  write_table(ctx, "verify-lemmas", "near_stationary.csv", std::move(near));
  if (ctx.log) {
    *ctx.log << "verify-lemmas: local injectivity " << inj.violations << " violations in " << inj.pairs << " pairs\n";
  }
  return inj.violations == 0 ? kOk : kHypothesis;
}

int run_command(const std::string& name, const RunContext& ctx) {
  if (name == "audit") return cmd_audit(ctx);
  if (name == "evaluate") return cmd_evaluate(ctx);
  if (name == "sweep") return cmd_sweep(ctx);
  if (name == "dispersive") return cmd_dispersive(ctx);
  if (name == "rescale-check") return cmd_rescale_check(ctx);
  if (name == "verify-lemmas") return cmd_verify_lemmas(ctx);
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace statphase::cli
