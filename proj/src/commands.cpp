#include "spdesim/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>
#include <variant>

#include "spdesim/criteria.hpp"
#include "spdesim/engine.hpp"
#include "spdesim/lyapunov.hpp"
#include "spdesim/reporting.hpp"
#include "spdesim/scenario_io.hpp"

namespace spdesim::cli {
namespace {

using nlohmann::ordered_json;

// Wraps a command body: module errors map onto the exit-code contract, the
// wall-clock line goes to err so the canonical report stays byte-stable.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 4;
  }
  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  char line[64];
  std::snprintf(line, sizeof line, "wall_clock_seconds=%.3f\n", elapsed.count());
  err << line;
  return code;
}

enum class SigmaMode { uniform, automatic, explicit_list };

struct SigmaChoice {
  SigmaMode mode = SigmaMode::uniform;
  std::vector<double> weights;
};

SigmaChoice parse_sigma(const std::string& text, int regimes) {
  if (text == "uniform") return {};
  if (text == "auto") return {SigmaMode::automatic, {}};
  SigmaChoice choice{SigmaMode::explicit_list, {}};
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string cell = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      choice.weights.push_back(v);
    } catch (const std::exception&) {
      fail(Errc::schema,
           "--sigma expects 'uniform', 'auto' or comma-separated weights; got '" +
               text + "'");
    }
    pos = comma + 1;
  }
  if (static_cast<int>(choice.weights.size()) != regimes)
    fail(Errc::schema, "--sigma needs one weight per regime (" +
                           std::to_string(regimes) + "), got " +
                           std::to_string(choice.weights.size()));
  return choice;
}

// All certified-bound reports that apply to the scenario's class.
std::vector<criteria::CriterionReport> analytic_reports(
    const io::LoadedScenario& L, const ctmc::StationaryDistribution& pi,
    const SigmaChoice& sigma) {
  const engine::Scenario& s = L.scenario;
  std::vector<criteria::CriterionReport> reports;
  if (s.is_linear()) {
    const auto& dyn = std::get<engine::LinearDynamics>(s.dynamics());
    criteria::LinearParams params{s.basis().eigenvalue(1), dyn.alpha_bar,
                                  dyn.beta_bar, L.moments};
    auto build = [&](const criteria::SigmaWeights& w) {
      return criteria::linear_terms(params, s.generator(), w);
    };
    if (sigma.mode == SigmaMode::automatic) {
      reports.push_back(criteria::optimize_sigma(build, pi).report);
    } else {
      auto w = sigma.mode == SigmaMode::explicit_list
                   ? criteria::SigmaWeights::of(sigma.weights)
                   : criteria::SigmaWeights::uniform(s.regimes());
      reports.push_back(
          criteria::theorem31_bound(build(w), pi, 2.0, criteria::Formula::thm31, &w));
    }
    reports.push_back(criteria::theorem41_bound(params, pi));
    int n0 = spectral::first_nonzero_index(s.initial());
    reports.push_back(
        criteria::theorem44_exact(params, pi, s.basis().eigenvalue(n0), n0));
  } else {
    criteria::SemilinearParams params{L.semi->nu, L.semi->b, L.semi->d, L.moments};
    auto build = [&](const criteria::SigmaWeights& w) {
      return criteria::semilinear_terms(params, s.generator(), w);
    };
    if (sigma.mode == SigmaMode::automatic) {
      reports.push_back(
          criteria::optimize_sigma(build, pi, 2.0, criteria::Formula::ex33).report);
    } else {
      auto w = sigma.mode == SigmaMode::explicit_list
                   ? criteria::SigmaWeights::of(sigma.weights)
                   : criteria::SigmaWeights::uniform(s.regimes());
      reports.push_back(
          criteria::theorem31_bound(build(w), pi, 2.0, criteria::Formula::ex33, &w));
    }
  }
  return reports;
}

struct PathResult {
  lyapunov::ExponentEstimate estimate;
  bool exploded = false;
  double explosion_time = std::numeric_limits<double>::infinity();
};

// Fixed work list indexed by path id; workers pull indices from an atomic
// counter, so the set of draws and the reduction order are both independent
// of the worker count.
std::vector<PathResult> simulate_paths(const io::LoadedScenario& L, int paths,
                                       int workers) {
  const engine::Scenario& s = L.scenario;
  std::vector<PathResult> results(static_cast<std::size_t>(paths));
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&] {
    for (;;) {
      int p = next.fetch_add(1);
      if (p >= paths) return;
      try {
        auto noise = engine::generate_noise(s, static_cast<std::uint64_t>(p),
                                            L.sim.seed);
        auto traj = s.is_linear() ? engine::exact_linear_path(s, noise)
                                  : engine::numerical_path(s, noise);
        PathResult r;
        r.exploded = traj.exploded;
        r.explosion_time = traj.explosion_time;
        try {
          r.estimate = lyapunov::pathwise_exponent(traj, L.sim.burn_in);
        } catch (const Error& e) {
          // A path that dies before the window opens still counts as extinct.
          if (e.code() != Errc::window_too_short || !traj.extinct) throw;
          r.estimate.extinct = true;
          r.estimate.terminal_quotient = std::numeric_limits<double>::quiet_NaN();
          r.estimate.regression_slope = std::numeric_limits<double>::quiet_NaN();
          r.estimate.window_begin = L.sim.burn_in * s.horizon();
          r.estimate.window_end = traj.extinction_time;
        }
        results[static_cast<std::size_t>(p)] = std::move(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int spawn = std::min(workers, paths);
  if (spawn <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int k = 0; k < spawn; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

report::ExplosionSummary explosion_summary(const std::vector<PathResult>& results) {
  report::ExplosionSummary sum;
  sum.first_time = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (!r.exploded) continue;
    ++sum.paths;
    sum.first_time = std::min(sum.first_time, r.explosion_time);
  }
  if (sum.paths == 0) sum.first_time = 0.0;
  return sum;
}

double sup_ln_error(const engine::Trajectory& a, const engine::Trajectory& b) {
  double sup = 0.0;
  for (std::size_t k = 0; k < a.ln_norm.size(); ++k)
    sup = std::max(sup, std::fabs(a.ln_norm[k] - b.ln_norm[k]));
  return sup;
}

void emit(std::ostream& out, const ordered_json& j) { out << j.dump(2) << "\n"; }

}  // namespace

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::schema:
    case Errc::bad_param_path:
    case Errc::syntax_error:
    case Errc::unknown_identifier:
    case Errc::unknown_function:
    case Errc::depth_exceeded:
      return 2;
    case Errc::non_square:
    case Errc::negative_off_diagonal:
    case Errc::reducible:
    case Errc::singular_beyond_rank_one:
    case Errc::domain_violation:
    case Errc::gamma_out_of_range:
    case Errc::moment_divergence:
    case Errc::all_zero:
    case Errc::under_resolved:
    case Errc::nonpositive_d:
    case Errc::hypothesis_violated:
    case Errc::not_linear:
      return 3;
    case Errc::quadrature_failure:
    case Errc::eval_domain:
    case Errc::window_too_short:
    case Errc::too_few_paths:
    case Errc::overflow:
      return 4;
  }
  return 4;
}

int run_validate(const std::string& file, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto L = io::load_scenario_file(file);
    auto pi = ctmc::stationary_distribution(L.scenario.generator());

    ordered_json j = report::header("validate", file, L.sim.seed);
    j["status"] = "ok";
    j["regimes"] = L.scenario.regimes();
    j["modes"] = L.scenario.basis().mode_count();
    j["dynamics"] = L.scenario.is_linear() ? "linear" : "semilinear";
    const auto& ji = L.scenario.jump_inputs();
    j["jumps"] = !ji ? "none"
                 : ji->measure.kind() == jumps::JumpMeasure::Kind::atomic
                     ? "atomic"
                     : "parametric";
    j["pi"] = pi.pi;
    if (!L.moments.empty()) {
      ordered_json list = ordered_json::array();
      for (const auto& m : L.moments) {
        ordered_json e;
        e["gamma_sq"] = m.gamma_sq;
        e["mu"] = m.mu;
        e["m"] = m.m_small;
        e["log_sq"] = m.log_sq;
        e["delta"] = m.delta;
        list.push_back(std::move(e));
      }
      j["jump_moments"] = std::move(list);
    }
    emit(out, j);
  });
}

int run_criterion(const std::string& file, const std::string& sigma_mode,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto L = io::load_scenario_file(file);
    auto pi = ctmc::stationary_distribution(L.scenario.generator());
    auto sigma = parse_sigma(sigma_mode, L.scenario.regimes());
    auto reports = analytic_reports(L, pi, sigma);

    ordered_json j = report::header("criterion", file, L.sim.seed);
    ordered_json list = ordered_json::array();
    for (const auto& r : reports) list.push_back(report::criterion_json(r));
    j["criteria"] = std::move(list);
    emit(out, j);
  });
}

int run_exponent(const std::string& file, const ExponentOptions& options,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto L = io::load_scenario_file(file);
    int paths = options.paths.value_or(L.sim.paths);
    if (paths < 1) fail(Errc::schema, "--paths must be a positive integer");
    if (options.workers < 1) fail(Errc::schema, "--workers must be a positive integer");

    auto results = simulate_paths(L, paths, options.workers);
    std::vector<lyapunov::ExponentEstimate> estimates;
    estimates.reserve(results.size());
    for (const auto& r : results) estimates.push_back(r.estimate);
    auto ensemble = lyapunov::ensemble_exponent(std::move(estimates));

    if (options.trajectory_out) {
      auto noise = engine::generate_noise(L.scenario, 0, L.sim.seed);
      auto traj = L.scenario.is_linear()
                      ? engine::exact_linear_path(L.scenario, noise)
                      : engine::numerical_path(L.scenario, noise);
      std::ofstream csv(*options.trajectory_out);
      if (!csv)
        fail(Errc::schema, "cannot open trajectory file '" + *options.trajectory_out + "'");
      csv << report::trajectory_csv(traj, L.sim.sample_stride);
    }

    ordered_json j = report::header("exponent", file, L.sim.seed);
    j["solver"] = L.scenario.is_linear() ? "exact" : "numerical";
    j["ensemble"] = report::ensemble_json(ensemble, explosion_summary(results));
    auto pi = ctmc::stationary_distribution(L.scenario.generator());
    ordered_json list = ordered_json::array();
    for (const auto& r : analytic_reports(L, pi, SigmaChoice{}))
      list.push_back(report::criterion_json(r));
    j["criteria"] = std::move(list);
    emit(out, j);
  });
}

int run_oracle(const std::string& file, int ladder, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    auto L = io::load_scenario_file(file);
    if (!L.scenario.is_linear())
      fail(Errc::not_linear,
           "the closed-form reference exists only for the mode-diagonal linear class");
    if (ladder < 0) fail(Errc::schema, "--dt-ladder must be nonnegative");

    auto noise = engine::generate_noise(L.scenario, 0, L.sim.seed);
    ordered_json rows = ordered_json::array();
    std::vector<double> errors;
    for (int level = 0; level <= ladder; ++level) {
      auto exact = engine::exact_linear_path(L.scenario, noise);
      auto num = engine::numerical_path(L.scenario, noise);
      double sup = sup_ln_error(exact, num);
      errors.push_back(sup);
      ordered_json row;
      row["dt"] = noise.dt;
      row["sup_error"] = sup;
      rows.push_back(std::move(row));
      if (level < ladder) noise = engine::refine_noise(noise, noise.dt / 2.0);
    }

    double order_sum = 0.0;
    int order_terms = 0;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
      if (errors[k] > 0.0 && errors[k + 1] > 0.0) {
        order_sum += std::log2(errors[k] / errors[k + 1]);
        ++order_terms;
      }
    }

    ordered_json j = report::header("oracle", file, L.sim.seed);
    j["ladder"] = std::move(rows);
    if (order_terms > 0)
      j["order"] = order_sum / order_terms;
    else
      j["order"] = nullptr;
    double finest = L.sim.dt / std::pow(2.0, ladder);
    if (finest < 1e-6)
      j["warning"] =
          "finest dt is below 1e-6; sup-errors sit near the rounding floor "
          "of the log-norm accumulation";
    emit(out, j);
  });
}

int run_sweep(const std::string& file, const std::string& param,
              const std::vector<double>& values, std::optional<int> mc_paths,
              int workers, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (values.empty()) fail(Errc::schema, "--values must contain at least one value");
    if (mc_paths && *mc_paths < 1)
      fail(Errc::schema, "--paths must be a positive integer");
    if (workers < 1) fail(Errc::schema, "--workers must be a positive integer");
    auto doc = io::read_json_file(file);

    out << "value,bound,mc_mean,mc_ci_lo,mc_ci_hi\n";
    for (double v : values) {
      auto varied = doc;
      io::set_numeric(varied, param, v);
      auto L = io::load_scenario(varied);
      auto pi = ctmc::stationary_distribution(L.scenario.generator());

      double bound = 0.0;
      if (L.scenario.is_linear()) {
        const auto& dyn = std::get<engine::LinearDynamics>(L.scenario.dynamics());
        criteria::LinearParams params{L.scenario.basis().eigenvalue(1),
                                      dyn.alpha_bar, dyn.beta_bar, L.moments};
        bound = criteria::theorem41_bound(params, pi).bound;
      } else {
        criteria::SemilinearParams params{L.semi->nu, L.semi->b, L.semi->d,
                                          L.moments};
        auto w = criteria::SigmaWeights::uniform(L.scenario.regimes());
        bound = criteria::theorem31_bound(
                    criteria::semilinear_terms(params, L.scenario.generator(), w),
                    pi, 2.0, criteria::Formula::ex33, &w)
                    .bound;
      }

      out << report::csv_number(v) << ',' << report::csv_number(bound);
      if (mc_paths) {
        auto results = simulate_paths(L, *mc_paths, workers);
        std::vector<lyapunov::ExponentEstimate> estimates;
        estimates.reserve(results.size());
        for (const auto& r : results) estimates.push_back(r.estimate);
        auto ensemble = lyapunov::ensemble_exponent(std::move(estimates));
        out << ',' << report::csv_number(ensemble.mean) << ','
            << report::csv_number(ensemble.ci_lo) << ','
            << report::csv_number(ensemble.ci_hi);
      } else {
        out << ",,,";
      }
      out << '\n';
    }
  });
}

}  // namespace spdesim::cli
