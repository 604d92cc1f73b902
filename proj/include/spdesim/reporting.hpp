#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "spdesim/criteria.hpp"
#include "spdesim/engine.hpp"
#include "spdesim/lyapunov.hpp"

namespace spdesim::report {

inline constexpr const char* kToolName = "spdesim";
inline constexpr const char* kToolVersion = "1.0.0";

// Common preamble of every report: tool identity, the invoked command, the
// scenario path as given, and the master seed in effect.
nlohmann::ordered_json header(const char* command, const std::string& scenario,
                              std::uint64_t seed);

nlohmann::ordered_json criterion_json(const criteria::CriterionReport& r);

// Ensemble summary: mean / stderr / ci / paths / extinct / verdict, the
// explosion tally when any path overflowed, and the per-path estimates.
struct ExplosionSummary {
  int paths = 0;
  double first_time = 0.0;
};
nlohmann::ordered_json ensemble_json(const lyapunov::EnsembleReport& r,
                                     const ExplosionSummary& explosions);

// "t,ln_norm,regime" rows at the given sampling stride; the final timeline
// point is always included.
std::string trajectory_csv(const engine::Trajectory& t, int stride);

// Fixed %.17g rendering used for CSV cells so output is bit-stable.
std::string csv_number(double x);

}  // namespace spdesim::report
