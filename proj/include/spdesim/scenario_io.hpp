#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdesim/engine.hpp"
#include "spdesim/jumps.hpp"

namespace spdesim::io {

struct SimParams {
  double T = 0.0;
  double dt = 0.0;
  int paths = 64;
  std::uint64_t seed = 0;
  double burn_in = 0.2;
  int sample_stride = 1;
};

// Criterion-side constants of the semilinear class that the integrator does
// not consume: 2xf + g^2 <= b_i x^2 and xg >= sqrt(d_i) x^2.
struct SemilinearCriterion {
  std::vector<double> b;
  std::vector<double> d;
  double nu = 1.0;
};

struct LoadedScenario {
  engine::Scenario scenario;
  SimParams sim;
  std::optional<SemilinearCriterion> semi;
  std::vector<jumps::JumpMoments> moments;  // one per regime; empty if no jumps
};

// Read and parse; malformed JSON reports Errc::schema with the parser's
// position info.
nlohmann::json read_json_file(const std::string& path);

// Validate the document against the scenario schema (unknown keys rejected,
// all types checked, error messages carry the JSON path) and build the fully
// validated Scenario plus the per-regime jump moments. Schema problems raise
// Errc::schema; everything else surfaces the underlying module's error.
LoadedScenario load_scenario(const nlohmann::json& doc);
LoadedScenario load_scenario_file(const std::string& path);

// Overwrite the numeric field addressed by a dotted path with 0-based array
// indices ("generator[1][0]", "dynamics.alpha_bar[0]", "sim.T"). Raises
// Errc::bad_param_path if the path does not land on a number.
void set_numeric(nlohmann::json& doc, const std::string& param, double value);

}  // namespace spdesim::io
