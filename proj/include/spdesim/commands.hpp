#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spdesim/errors.hpp"

namespace spdesim::cli {

// Exit-code contract: 0 success, 2 schema/usage, 3 standing-hypothesis
// violation, 4 numeric failure at run time.
int exit_code_for(Errc code);

struct ExponentOptions {
  std::optional<int> paths;                   // overrides sim.paths
  int workers = 1;                            // result is worker-count independent
  std::optional<std::string> trajectory_out;  // CSV dump of path 0
};

// Each command writes its report (JSON or CSV) to `out`, diagnostics and the
// wall-clock line to `err`, and returns the process exit code.
int run_validate(const std::string& file, std::ostream& out, std::ostream& err);
int run_criterion(const std::string& file, const std::string& sigma_mode,
                  std::ostream& out, std::ostream& err);
int run_exponent(const std::string& file, const ExponentOptions& options,
                 std::ostream& out, std::ostream& err);
int run_oracle(const std::string& file, int ladder, std::ostream& out,
               std::ostream& err);
int run_sweep(const std::string& file, const std::string& param,
              const std::vector<double>& values, std::optional<int> mc_paths,
              int workers, std::ostream& out, std::ostream& err);

}  // namespace spdesim::cli
