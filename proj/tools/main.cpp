#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdesim/commands.hpp"
#include "spdesim/reporting.hpp"

namespace {

// Reports are built in memory and written in one piece, so --out and stdout
// carry identical bytes.
int deliver(const std::string& out_path, const std::ostringstream& buffer) {
  if (out_path.empty()) {
    std::cout << buffer.str();
    return 0;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open output file '" << out_path << "'\n";
    return 2;
  }
  f << buffer.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Certified stability bounds and pathwise Lyapunov-exponent estimation "
      "for regime-switching stochastic heat equations with jumps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spdesim::report::kToolName) +
                                        " " + spdesim::report::kToolVersion);

  std::string file;
  std::string out_path;
  std::string sigma = "uniform";
  std::string param;
  std::vector<double> values;
  std::optional<int> paths;
  std::optional<std::string> trajectory;
  int workers = 1;
  int ladder = 3;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", file, "Scenario JSON file")->required();
    sub->add_option("--out", out_path, "Write the report here instead of stdout");
  };

  CLI::App* validate =
      app.add_subcommand("validate", "Schema and hypothesis checks only");
  add_common(validate);

  CLI::App* criterion =
      app.add_subcommand("criterion", "Evaluate every applicable certified bound");
  add_common(criterion);
  criterion->add_option(
      "--sigma", sigma,
      "Lyapunov weights: 'uniform', 'auto', or comma-separated values");

  CLI::App* exponent = app.add_subcommand(
      "exponent", "Monte Carlo estimate of the sample Lyapunov exponent");
  add_common(exponent);
  exponent->add_option("--paths", paths, "Number of paths (overrides sim.paths)");
  exponent->add_option("--workers", workers, "Worker threads (default 1)");
  exponent->add_option("--trajectory", trajectory, "Write path 0 as CSV here");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Numerical-vs-closed-form sup error over a dt refinement ladder");
  add_common(oracle);
  oracle->add_option("--dt-ladder", ladder, "Number of halvings (default 3)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Certified bound (and optional Monte Carlo) along one parameter");
  add_common(sweep);
  sweep->add_option("--param", param, "Dotted path of the scalar to vary")->required();
  sweep->add_option("--values", values, "Comma-separated parameter values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--paths", paths, "Monte Carlo paths per value (off by default)");
  sweep->add_option("--workers", workers, "Worker threads (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::ostringstream buffer;
  int code = 0;
  if (validate->parsed()) {
    code = spdesim::cli::run_validate(file, buffer, std::cerr);
  } else if (criterion->parsed()) {
    code = spdesim::cli::run_criterion(file, sigma, buffer, std::cerr);
  } else if (exponent->parsed()) {
    spdesim::cli::ExponentOptions options;
    options.paths = paths;
    options.workers = workers;
    options.trajectory_out = trajectory;
    code = spdesim::cli::run_exponent(file, options, buffer, std::cerr);
  } else if (oracle->parsed()) {
    code = spdesim::cli::run_oracle(file, ladder, buffer, std::cerr);
  } else if (sweep->parsed()) {
    code = spdesim::cli::run_sweep(file, param, values, paths, workers, buffer,
                                   std::cerr);
  }

  int delivery = deliver(out_path, buffer);
  return code != 0 ? code : delivery;
}
