#include "spdesim/reporting.hpp"

#include <cstdio>

namespace spdesim::report {

using nlohmann::ordered_json;

ordered_json header(const char* command, const std::string& scenario,
                    std::uint64_t seed) {
  ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["scenario"] = scenario;
  j["seed"] = seed;
  return j;
}

ordered_json criterion_json(const criteria::CriterionReport& r) {
  ordered_json j;
  j["formula"] = criteria::formula_name(r.formula);
  j["p"] = r.p;
  j["bound"] = r.bound;
  j["exact"] = r.exact;
  j["verdict"] = verdict_name(r.verdict);
  j["pi"] = r.pi;
  if (!r.sigma.empty()) j["sigma"] = r.sigma;
  if (r.terms) {
    ordered_json t;
    t["alpha"] = r.terms->alpha;
    t["beta"] = r.terms->beta;
    t["delta"] = r.terms->delta;
    t["rho"] = r.terms->rho;
    j["terms"] = t;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

ordered_json ensemble_json(const lyapunov::EnsembleReport& r,
                           const ExplosionSummary& explosions) {
  ordered_json j;
  j["mean"] = r.mean;
  j["stderr"] = r.std_error;
  j["ci"] = {r.ci_lo, r.ci_hi};
  j["paths"] = r.paths;
  j["extinct"] = r.extinct;
  j["verdict"] = verdict_name(r.verdict);
  if (explosions.paths > 0) {
    ordered_json e;
    e["paths"] = explosions.paths;
    e["first_time"] = explosions.first_time;
    j["explosions"] = e;
  }
  ordered_json list = ordered_json::array();
  for (const auto& est : r.estimates) {
    ordered_json e;
    e["quotient"] = est.terminal_quotient;
    e["slope"] = est.regression_slope;
    e["window"] = {est.window_begin, est.window_end};
    e["extinct"] = est.extinct;
    list.push_back(std::move(e));
  }
  j["estimates"] = std::move(list);
  return j;
}

std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const engine::Trajectory& t, int stride) {
  if (stride < 1) fail(Errc::domain_violation, "sample stride must be positive");
  std::string out = "t,ln_norm,regime\n";
  std::size_t n = t.times.size();
  auto row = [&](std::size_t k) {
    out += csv_number(t.times[k]);
    out += ',';
    out += csv_number(t.ln_norm[k]);
    out += ',';
    out += std::to_string(t.regime[k]);
    out += '\n';
  };
  std::size_t last = 0;
  for (std::size_t k = 0; k < n; k += static_cast<std::size_t>(stride)) {
    row(k);
    last = k;
  }
  if (n > 0 && last != n - 1) row(n - 1);
  return out;
}

}  // namespace spdesim::report
