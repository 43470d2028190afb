#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "statphase/errors.hpp"

namespace statphase::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config " + (path.empty() ? std::string("/") : path) + ": " + what);
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) fail(path + "/" + k, "unknown key");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "not finite");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

int integer(const json& j, const std::string& path, int lo = 0) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo || v > 1'000'000'000) fail(path, "out of range");
  return static_cast<int>(v);
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path)};
  if (!j.is_array()) fail(path, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "/" + std::to_string(i)));
  return out;
}

FamilySpec family(const json& j, const std::string& path, bool with_domain) {
  if (with_domain) {
    only_keys(j, path, {"family", "params", "choices", "domain"});
  } else {
    only_keys(j, path, {"family", "params", "choices"});
  }
  if (!j.contains("family")) fail(path + "/family", "missing");
  FamilySpec s;
  s.family = text(j["family"], path + "/family");
  if (j.contains("params")) {
    if (!j["params"].is_object()) fail(path + "/params", "expected an object");
    for (const auto& [k, v] : j["params"].items()) s.params[k] = numbers(v, path + "/params/" + k);
  }
  if (j.contains("choices")) {
    if (!j["choices"].is_object()) fail(path + "/choices", "expected an object");
    for (const auto& [k, v] : j["choices"].items()) s.choices[k] = text(v, path + "/choices/" + k);
  }
  return s;
}

Box box(const json& j, const std::string& path) {
  only_keys(j, path, {"lo", "hi"});
  if (!j.contains("lo") || !j.contains("hi")) fail(path, "needs lo and hi");
  auto lo = numbers(j["lo"], path + "/lo");
  auto hi = numbers(j["hi"], path + "/hi");
  if (lo.size() != hi.size() || lo.empty()) fail(path, "lo and hi must have the same nonzero length");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) fail(path, "lo must be below hi on every axis");
  }
  return Box(lo, hi);
}

GridSpec grid(const json& j, const std::string& path) {
  only_keys(j, path, {"start", "stop", "count"});
  GridSpec g;
  if (!j.contains("start")) fail(path + "/start", "missing");
  g.start = positive(j["start"], path + "/start");
  g.stop = j.contains("stop") ? positive(j["stop"], path + "/stop") : g.start;
  g.count = j.contains("count") ? integer(j["count"], path + "/count", 1) : 1;
  if (g.stop < g.start) fail(path, "stop below start");
  if (g.count == 1 && g.stop != g.start) fail(path + "/count", "a single point needs stop == start");
  return g;
}

json grid_json(const GridSpec& g) { return {{"start", g.start}, {"stop", g.stop}, {"count", g.count}}; }

IntegralMethod method(const json& j, const std::string& path) {
  const auto s = text(j, path);
  for (auto m : {IntegralMethod::oracle, IntegralMethod::decomposition, IntegralMethod::decomposition_single_ball}) {
    if (to_string(m) == s) return m;
  }
  fail(path, "unknown method '" + s + "'");
}

std::string line_diagnostic(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::vector<double> GridSpec::values() const {
  if (count == 1) return {start};
  return geometric_grid(start, stop, count);
}

PhaseModel ExperimentConfig::make_phase() const { return builtin_phase(phase, domain); }

SymbolModel ExperimentConfig::make_symbol() const { return builtin_symbol(symbol, dim(), domain); }

ExperimentConfig parse_config(const std::string& source) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError("config syntax error at " + line_diagnostic(source, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                      e.what());
  }
  only_keys(j, "", {"schema_version", "phase", "symbol", "lambda", "methods", "output_dir", "seed", "overrides",
                    "sweep", "dispersive", "rescale", "lemmas"});

  ExperimentConfig c;
  if (!j.contains("schema_version")) fail("/schema_version", "missing");
  c.schema_version = integer(j["schema_version"], "/schema_version");
  if (c.schema_version != kSchemaVersion) {
    fail("/schema_version", "unsupported version " + std::to_string(c.schema_version));
  }

  if (!j.contains("phase")) fail("/phase", "missing");
  if (!j.contains("symbol")) fail("/symbol", "missing");
  c.phase = family(j["phase"], "/phase", true);
  if (!j["phase"].contains("domain")) fail("/phase/domain", "missing");
  c.domain = box(j["phase"]["domain"], "/phase/domain");
  c.symbol = family(j["symbol"], "/symbol", false);

  const auto& pn = phase_family_names();
  if (std::find(pn.begin(), pn.end(), c.phase.family) == pn.end()) {
    fail("/phase/family", "unknown family '" + c.phase.family + "'");
  }
  const auto& sn = symbol_family_names();
  if (std::find(sn.begin(), sn.end(), c.symbol.family) == sn.end()) {
    fail("/symbol/family", "unknown family '" + c.symbol.family + "'");
  }
  try {
    (void)c.make_phase();
  } catch (const Error& e) {
    fail("/phase", e.what());
  }
  try {
    (void)c.make_symbol();
  } catch (const Error& e) {
    fail("/symbol", e.what());
  }

  if (j.contains("lambda")) c.lambda = grid(j["lambda"], "/lambda");
  if (c.lambda.start < 1.0) fail("/lambda/start", "lambda must be at least 1");

  if (j.contains("methods")) {
    if (!j["methods"].is_array() || j["methods"].empty()) fail("/methods", "expected a nonempty array");
    c.methods.clear();
    for (std::size_t i = 0; i < j["methods"].size(); ++i) {
      c.methods.push_back(method(j["methods"][i], "/methods/" + std::to_string(i)));
    }
  }
  if (j.contains("output_dir")) c.output_dir = text(j["output_dir"], "/output_dir");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("/seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("overrides")) {
    const auto& o = j["overrides"];
    only_keys(o, "/overrides", {"C_d", "C_prime_d", "N", "delta_cap", "delta", "audit_grid_points", "calibration_C",
                                "rel_tol", "max_evaluations", "near_stationary_samples"});
    auto& r = c.overrides;
    if (o.contains("C_d")) r.C_d = positive(o["C_d"], "/overrides/C_d");
    if (o.contains("C_prime_d")) r.C_prime_d = positive(o["C_prime_d"], "/overrides/C_prime_d");
    if (o.contains("N")) r.N = integer(o["N"], "/overrides/N", 1);
    if (o.contains("delta_cap")) r.delta_cap = positive(o["delta_cap"], "/overrides/delta_cap");
    if (o.contains("delta")) r.delta = positive(o["delta"], "/overrides/delta");
    if (o.contains("audit_grid_points")) r.audit_grid_points = integer(o["audit_grid_points"], "/overrides/audit_grid_points", 2);
    if (o.contains("calibration_C")) r.calibration_C = positive(o["calibration_C"], "/overrides/calibration_C");
    if (o.contains("rel_tol")) r.rel_tol = positive(o["rel_tol"], "/overrides/rel_tol");
    if (o.contains("max_evaluations")) r.max_evaluations = positive(o["max_evaluations"], "/overrides/max_evaluations");
    if (o.contains("near_stationary_samples")) {
      r.near_stationary_samples = integer(o["near_stationary_samples"], "/overrides/near_stationary_samples", 2);
    }
  }

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    only_keys(s, "/sweep", {"bound", "tail_fraction", "residual_threshold"});
    if (s.contains("bound")) {
      const auto b = text(s["bound"], "/sweep/bound");
      if (b == "thm1") {
        c.sweep.bound = BoundVariant::thm1;
      } else if (b == "thm2") {
        c.sweep.bound = BoundVariant::thm2;
      } else {
        fail("/sweep/bound", "expected thm1 or thm2");
      }
    }
    if (s.contains("tail_fraction")) c.sweep.tail_fraction = positive(s["tail_fraction"], "/sweep/tail_fraction");
    if (c.sweep.tail_fraction > 1.0) fail("/sweep/tail_fraction", "must be at most 1");
    if (s.contains("residual_threshold")) {
      c.sweep.residual_threshold = positive(s["residual_threshold"], "/sweep/residual_threshold");
    }
  }

  const int d = c.dim();
  c.dispersive.x.assign(static_cast<std::size_t>(d), 0.0);
  c.dispersive.y.assign(static_cast<std::size_t>(d), 0.0);
  if (j.contains("dispersive")) {
    const auto& s = j["dispersive"];
    only_keys(s, "/dispersive", {"theta", "lambda", "t", "x", "y", "fit_t_min_factor"});
    auto& r = c.dispersive;
    if (s.contains("theta")) r.theta = text(s["theta"], "/dispersive/theta");
    if (r.theta != "quadratic" && r.theta != "klein_gordon") fail("/dispersive/theta", "expected quadratic or klein_gordon");
    if (s.contains("lambda")) r.lambda = positive(s["lambda"], "/dispersive/lambda");
    if (r.lambda < 1.0) fail("/dispersive/lambda", "lambda must be at least 1");
    if (s.contains("t")) r.t = grid(s["t"], "/dispersive/t");
    if (s.contains("x")) r.x = numbers(s["x"], "/dispersive/x");
    if (s.contains("y")) r.y = numbers(s["y"], "/dispersive/y");
    if (static_cast<int>(r.x.size()) != d || static_cast<int>(r.y.size()) != d) {
      fail("/dispersive", "x and y need one entry per dimension");
    }
    if (s.contains("fit_t_min_factor")) r.fit_t_min_factor = positive(s["fit_t_min_factor"], "/dispersive/fit_t_min_factor");
  }

  if (j.contains("rescale")) {
    const auto& s = j["rescale"];
    only_keys(s, "/rescale", {"lambda", "t"});
    if (s.contains("lambda")) c.rescale.lambda = positive(s["lambda"], "/rescale/lambda");
    if (s.contains("t")) {
      c.rescale.t = numbers(s["t"], "/rescale/t");
      for (double t : c.rescale.t) {
        if (!(t > 0.0)) fail("/rescale/t", "entries must be positive");
      }
    }
  }

  if (j.contains("lemmas")) {
    const auto& s = j["lemmas"];
    only_keys(s, "/lemmas", {"N", "samples", "grad_min", "grad_max", "beta_max", "injectivity_pairs"});
    auto& r = c.lemmas;
    if (s.contains("N")) {
      for (double v : numbers(s["N"], "/lemmas/N")) {
        if (v < 1 || v != std::floor(v)) fail("/lemmas/N", "entries must be positive integers");
        r.N.push_back(static_cast<int>(v));
      }
    }
    if (s.contains("samples")) r.samples = integer(s["samples"], "/lemmas/samples", 1);
    if (s.contains("grad_min")) r.grad_min = number(s["grad_min"], "/lemmas/grad_min");
    if (s.contains("grad_max")) r.grad_max = positive(s["grad_max"], "/lemmas/grad_max");
    if (s.contains("beta_max")) r.beta_max = integer(s["beta_max"], "/lemmas/beta_max");
    if (s.contains("injectivity_pairs")) r.injectivity_pairs = integer(s["injectivity_pairs"], "/lemmas/injectivity_pairs", 1);
  }
  if (c.lemmas.N.empty()) {
    for (int n = 1; n <= d + 1; ++n) c.lemmas.N.push_back(n);
  }

  // Normalized echo.
  auto fam = [](const FamilySpec& f) {
    json p = json::object(), ch = json::object();
    for (const auto& [k, v] : f.params) p[k] = v;
    for (const auto& [k, v] : f.choices) ch[k] = v;
    return json{{"family", f.family}, {"params", p}, {"choices", ch}};
  };
  json& e = c.raw;
  e["schema_version"] = c.schema_version;
  e["phase"] = fam(c.phase);
  e["phase"]["domain"] = {{"lo", c.domain.lo()}, {"hi", c.domain.hi()}};
  e["symbol"] = fam(c.symbol);
  e["lambda"] = grid_json(c.lambda);
  e["methods"] = json::array();
  for (auto m : c.methods) e["methods"].push_back(to_string(m));
  e["output_dir"] = c.output_dir;
  e["seed"] = c.seed;
  json o = json::object();
  const auto& r = c.overrides;
  if (r.C_d) o["C_d"] = *r.C_d;
  if (r.C_prime_d) o["C_prime_d"] = *r.C_prime_d;
  if (r.N) o["N"] = *r.N;
  if (r.delta_cap) o["delta_cap"] = *r.delta_cap;
  if (r.delta) o["delta"] = *r.delta;
  if (r.audit_grid_points) o["audit_grid_points"] = *r.audit_grid_points;
  if (r.calibration_C) o["calibration_C"] = *r.calibration_C;
  o["rel_tol"] = r.rel_tol;
  o["max_evaluations"] = r.max_evaluations;
  o["near_stationary_samples"] = r.near_stationary_samples;
  e["overrides"] = o;
  e["sweep"] = {{"bound", to_string(c.sweep.bound)},
                {"tail_fraction", c.sweep.tail_fraction},
                {"residual_threshold", c.sweep.residual_threshold}};
  e["dispersive"] = {{"theta", c.dispersive.theta},   {"lambda", c.dispersive.lambda},
                     {"t", grid_json(c.dispersive.t)}, {"x", c.dispersive.x},
                     {"y", c.dispersive.y},           {"fit_t_min_factor", c.dispersive.fit_t_min_factor}};
  e["rescale"] = {{"lambda", c.rescale.lambda}, {"t", c.rescale.t}};
  e["lemmas"] = {{"N", c.lemmas.N},
                 {"samples", c.lemmas.samples},
                 {"grad_min", c.lemmas.grad_min},
                 {"grad_max", c.lemmas.grad_max},
                 {"beta_max", c.lemmas.beta_max},
                 {"injectivity_pairs", c.lemmas.injectivity_pairs}};
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> provenance_lines(const ExperimentConfig& config, const std::string& command) {
  std::vector<std::string> out{"command=" + command};
  const auto flat = config.raw.flatten();
  for (const auto& [k, v] : flat.items()) {
    out.push_back(k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
  }
  return out;
}

}  // namespace statphase::cli
