#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "statphase/errors.hpp"

int main(int argc, char** argv) {
  using namespace statphase::cli;

  CLI::App app{"statphase: stationary phase experiments from a JSON config"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 42;
  bool seed_given = false;
  int threads = 1;
  bool force = false;
  double lambda = 0.0;
  bool quiet = false;

  const char* names[] = {"audit", "evaluate", "sweep", "dispersive", "rescale-check", "verify-lemmas"};
  const char* help[] = {
      "Audit the hypotheses (a0, M_k, N_l, injectivity, delta)",
      "Evaluate I(lambda) with each configured method",
      "Decay sweep, log-log fit and bound ratios",
      "Dispersive family |I| against t",
      "Rescaling invariance I(lambda, Phi) vs I(t lambda, Phi / t)",
      "Coefficient lemma ratios, local injectivity and near-stationary measure",
  };
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (default: output_dir from the config)");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; },
                                            "Random seed (default: config seed, 42)");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));
    sub->add_flag("--force", force, "Continue when the audit fails");
    sub->add_flag("--quiet", quiet, "No progress output");
    if (std::string(names[i]) == "evaluate") {
      sub->add_option("--lambda", lambda, "Single lambda (default: the config grid)")->check(CLI::PositiveNumber);
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunContext ctx{load_config(config_path)};
    if (seed_given) {
      ctx.config.seed = seed;
      ctx.config.raw["seed"] = seed;
    }
    ctx.out = out_dir.empty() ? ctx.config.output_dir : out_dir;
    ctx.threads = threads;
    ctx.force = force;
    if (lambda > 0.0) ctx.lambda = lambda;
    ctx.log = quiet ? nullptr : &std::cerr;
    return run_command(command, ctx);
  } catch (const statphase::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const statphase::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
