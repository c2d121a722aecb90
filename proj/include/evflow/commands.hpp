#pragma once

/// @file commands.hpp
/// @brief The `solve`, `convergence` and `compare-dd` drivers.

#include <iosfwd>
#include <string>

#include "evflow/config.hpp"

namespace evflow {

struct CommandContext {
  std::ostream* out = nullptr;  ///< reports and, without a csv path, the CSV table
  std::ostream* err = nullptr;
  int threads = 1;
};

/// Runs one command on a validated config. Returns the process exit status;
/// failures are reported on ctx.err.
int run_command(const std::string& command, const RunConfig& cfg, const CommandContext& ctx);

/// Largest differences between the block-Jacobi and monolithic solutions.
struct DdComparison {
  double max_dp = 0.0;
  double max_du = 0.0;
  int iterations = 0;
  double last_change = 0.0;

  double discrepancy() const { return max_dp > max_du ? max_dp : max_du; }
};

DdComparison compare_dd(const ManufacturedCase& mfg, const Discretization& disc, double solver_tol, double dd_tol,
                        int max_iter, int threads = 1);

}  // namespace evflow
