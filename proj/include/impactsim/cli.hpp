#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "impactsim/io.hpp"

namespace impactsim::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // config / usage errors
inline constexpr int kExitNumerical = 2;  // step failure, diverged fixed point, failed check

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
};

/// Runs one simulation from a JSON config and writes the trajectory and
/// impacts CSVs. Partial outputs are kept on numerical failure.
int cmd_run(const GlobalOptions& opts, std::ostream& out, std::ostream& err);

/// h-refinement study; per-h runs may execute concurrently (capped by the
/// IMPACTSIM_THREADS environment variable, default: number of h values).
int cmd_converge(const GlobalOptions& opts, std::ostream& out, std::ostream& err);

/// Randomized check of the discrete velocity bound of the scalar clamped
/// recurrence; prints the first counterexample on failure.
int cmd_lemma_check(long count, std::uint64_t seed, std::ostream& out, std::ostream& err);

/// Lists the built-in models.
int cmd_models(std::ostream& out);

}  // namespace impactsim::cli
