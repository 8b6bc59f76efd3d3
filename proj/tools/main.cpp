#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "impactsim/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"impactsim: projection time stepping for mechanical systems with a "
               "unilateral constraint and restitution impacts"};
  app.require_subcommand(1);

  impactsim::cli::GlobalOptions opts;
  app.add_option("--config", opts.config_path, "JSON configuration file");
  app.add_option("--out-dir", opts.out_dir, "output directory (default: current)");
  app.add_flag("--quiet", opts.quiet, "suppress the run summary");

  auto* run = app.add_subcommand("run", "simulate one configured model");
  auto* converge = app.add_subcommand("converge", "h-refinement convergence study");

  long lemma_count = 10000;
  std::uint64_t lemma_seed = 12345;
  auto* lemma = app.add_subcommand("lemma-check",
                                   "randomized check of the discrete velocity bound");
  lemma->add_option("--count", lemma_count, "number of random recurrences (default 10000)");
  lemma->add_option("--seed", lemma_seed, "random seed (default 12345)");

  auto* models = app.add_subcommand("models", "list the built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (run->parsed()) {
    if (opts.config_path.empty()) {
      std::cerr << "run requires --config\n";
      return impactsim::cli::kExitUsage;
    }
    return impactsim::cli::cmd_run(opts, std::cout, std::cerr);
  }
  if (converge->parsed()) {
    if (opts.config_path.empty()) {
      std::cerr << "converge requires --config\n";
      return impactsim::cli::kExitUsage;
    }
    return impactsim::cli::cmd_converge(opts, std::cout, std::cerr);
  }
  if (lemma->parsed()) {
    return impactsim::cli::cmd_lemma_check(lemma_count, lemma_seed, std::cout, std::cerr);
  }
  if (models->parsed()) {
    return impactsim::cli::cmd_models(std::cout);
  }
  return impactsim::cli::kExitUsage;
}
