// Release gate: every criterion below must hold on a clean build. Each one
// prints a single PASS/FAIL line; the process exits nonzero if any fail.
//
// Usage: acceptance <cli-binary> <scenarios-dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdesim/criteria.hpp"
#include "spdesim/ctmc.hpp"
#include "spdesim/engine.hpp"
#include "spdesim/jumps.hpp"
#include "spdesim/rng.hpp"

using nlohmann::json;
using namespace spdesim;

namespace {

std::string g_cli;
std::string g_scenarios;
std::filesystem::path g_tmp;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(double x, const char* format = "%.3g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

int run_cli(const std::string& args, const std::string& out_file) {
  std::string cmd = "'" + g_cli + "' " + args;
  if (!out_file.empty()) cmd += " --out '" + out_file + "'";
  cmd += " >/dev/null 2>/dev/null";
  int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

std::string scenario(const char* name) { return g_scenarios + "/" + name; }

// --- 1. The integrator converges to the closed-form solution as dt halves. --

Outcome ladder_convergence() {
  auto t0 = std::chrono::steady_clock::now();
  auto out = (g_tmp / "ladder.json").string();
  int rc = run_cli("oracle '" + scenario("linear_oracle.json") + "' --dt-ladder 3", out);
  double secs = seconds_since(t0);
  if (rc != 0) return {false, "oracle exited " + std::to_string(rc)};

  auto j = read_json(out);
  const auto& rows = j["ladder"];
  if (rows.size() != 4) return {false, "expected 4 ladder rows"};
  if (std::fabs(rows[0]["dt"].get<double>() - 1e-2) > 1e-15 ||
      std::fabs(rows[3]["dt"].get<double>() - 1.25e-3) > 1e-15)
    return {false, "ladder does not span 1e-2 .. 1.25e-3"};

  double worst_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    double a = rows[k]["sup_error"].get<double>();
    double b = rows[k + 1]["sup_error"].get<double>();
    if (b > a) return {false, "sup-error grew between rungs " + std::to_string(k) +
                                  " and " + std::to_string(k + 1)};
    worst_ratio = std::max(worst_ratio, b / a);
  }
  bool pass = worst_ratio <= 0.75 && secs < 10.0;
  return {pass, "worst halving ratio " + fmt(worst_ratio) + ", " + fmt(secs) + " s"};
}

// --- 2. Geometric jump diffusion: Monte Carlo CI brackets the known limit. --

Outcome geometric_ci() {
  const double limit = 2.0 * std::log(1.5) - 1.5;  // -0.689069783783672
  auto t0 = std::chrono::steady_clock::now();
  auto out = (g_tmp / "geometric.json").string();
  int rc = run_cli("exponent '" + scenario("geometric_jump_diffusion.json") +
                       "' --workers 4",
                   out);
  double secs = seconds_since(t0);
  if (rc != 0) return {false, "exponent exited " + std::to_string(rc)};

  auto e = read_json(out)["ensemble"];
  double lo = e["ci"][0].get<double>(), hi = e["ci"][1].get<double>();
  bool contains = lo <= limit && limit <= hi;
  bool narrow = hi - lo <= 0.10;
  bool pass = contains && narrow && secs < 60.0;
  return {pass, "ci [" + fmt(lo, "%.4f") + ", " + fmt(hi, "%.4f") + "] vs " +
                    fmt(limit, "%.5f") + ", width " + fmt(hi - lo) + ", " +
                    fmt(secs) + " s"};
}

// --- 3. Switching stabilization: mixed chain stable, frozen regimes not. ----

Outcome stabilization() {
  auto out = (g_tmp / "stab.json").string();
  if (run_cli("exponent '" + scenario("switching_stabilization.json") + "' --workers 4",
              out) != 0)
    return {false, "mixed-chain exponent failed"};
  auto e = read_json(out)["ensemble"];
  double lo = e["ci"][0].get<double>(), hi = e["ci"][1].get<double>();
  if (!(lo - 0.05 <= -2.0 / 3.0 && -2.0 / 3.0 <= hi + 0.05))
    return {false, "mixed-chain ci [" + fmt(lo, "%.4f") + ", " + fmt(hi, "%.4f") +
                       "] misses -2/3"};

  if (run_cli("exponent '" + scenario("frozen_fast_regime.json") + "'", out) != 0)
    return {false, "frozen-fast exponent failed"};
  auto fast = read_json(out)["ensemble"];
  bool diverges = fast["mean"].get<double>() >= 1.9 || fast.contains("explosions");
  if (!diverges) return {false, "frozen fast regime did not diverge"};

  if (run_cli("exponent '" + scenario("frozen_slow_regime.json") + "'", out) != 0)
    return {false, "frozen-slow exponent failed"};
  auto slow = read_json(out)["ensemble"];
  double slo = slow["ci"][0].get<double>(), shi = slow["ci"][1].get<double>();
  if (!(slo - 0.05 <= -2.0 && -2.0 <= shi + 0.05))
    return {false, "frozen slow ci misses -2"};

  auto csv_path = (g_tmp / "qsweep.csv").string();
  if (run_cli("sweep '" + scenario("switching_stabilization.json") +
                  "' --param generator[1][0] --values 0.75,1.25",
              csv_path) != 0)
    return {false, "q sweep failed"};
  std::ifstream csv(csv_path);
  std::string line;
  std::getline(csv, line);  // header
  std::vector<double> bounds;
  while (std::getline(csv, line)) {
    auto a = line.find(','), b = line.find(',', a + 1);
    bounds.push_back(std::stod(line.substr(a + 1, b - a - 1)));
  }
  if (bounds.size() != 2 || !(bounds[0] < 0.0 && 0.0 < bounds[1]))
    return {false, "verdict did not flip inside q = (0.75, 1.25)"};

  return {true, "ci around -2/3, frozen regimes diverge/decay, flip in (0.75, 1.25)"};
}

// --- 4. The weighted-family bound at uniform weights equals the ergodic ----
// ---    average bound on randomized mode-diagonal scenarios.            ----

Outcome bounds_agree() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240817u);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int m = 1 + static_cast<int>(rng() % 4);
    std::vector<std::vector<double>> raw(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j) raw[i][j] = uniform(0.05, 2.0);
    auto g = ctmc::GeneratorMatrix::validate(raw);
    auto pi = ctmc::stationary_distribution(g);

    criteria::LinearParams p;
    p.lambda1 = uniform(0.5, 5.0);
    for (int i = 0; i < m; ++i) {
      p.alpha_bar.push_back(uniform(-3.0, 3.0));
      p.beta_bar.push_back(uniform(0.0, 2.0));
    }
    if (trial % 2 == 0) {
      int atoms = 1 + static_cast<int>(rng() % 2);
      std::vector<double> rates;
      std::vector<std::vector<double>> per_atom;
      for (int k = 0; k < atoms; ++k) {
        rates.push_back(uniform(0.1, 2.0));
        per_atom.push_back({});
        for (int i = 0; i < m; ++i) per_atom.back().push_back(uniform(-0.9, 2.0));
      }
      auto measure = jumps::JumpMeasure::atomic(rates);
      auto profile = jumps::GammaProfile::atomic(per_atom);
      for (int i = 0; i < m; ++i)
        p.moments.push_back(jumps::jump_moments(measure, profile, i));
    }

    auto terms = criteria::linear_terms(p, g, criteria::SigmaWeights::uniform(m));
    double family = criteria::theorem31_bound(terms, pi).bound;
    double ergodic = criteria::theorem41_bound(p, pi).bound;
    worst = std::max(worst, std::fabs(family - ergodic));
  }
  double secs = seconds_since(t0);
  bool pass = worst <= 1e-12 && secs < 1.0;
  return {pass, "max |family - ergodic| = " + fmt(worst) + " over 100 draws, " +
                    fmt(secs) + " s"};
}

// --- 5. Two-regime dissipative template: switching penalties and the -------
// ---    certified decay match independent hand arithmetic.            -------

Outcome closed_form_template() {
  const double q = 0.8, w = 2.5, nu = 1.0;
  auto g = ctmc::GeneratorMatrix::validate({{-1.0, 1.0}, {q, -q}});
  auto pi = ctmc::stationary_distribution(g);

  criteria::SemilinearParams p;
  p.nu = nu;
  p.b = {0.9, 0.4};
  p.d = {0.6, 1.1};
  auto measure = jumps::JumpMeasure::atomic({1.5});
  auto profile = jumps::GammaProfile::atomic({{0.5, -0.3}});
  p.moments = {jumps::jump_moments(measure, profile, 0),
               jumps::jump_moments(measure, profile, 1)};

  auto terms =
      criteria::semilinear_terms(p, g, criteria::SigmaWeights::of({1.0, w}));

  // Hand arithmetic, written from scratch: switching penalties for weights
  // (1, w) on [[-1, 1], [q, -q]], jump dissipation 2(gamma - ln(1+gamma))
  // at rate 1.5, and the resulting decay constant.
  const double rho1 = 1.0 - w + std::log(w);
  const double rho2 = q * (1.0 - 1.0 / w - std::log(w));
  const double m1 = 1.5 * 2.0 * (0.5 - std::log1p(0.5));
  const double m2 = 1.5 * 2.0 * (-0.3 - std::log1p(-0.3));
  const double theta = q * (p.d[0] / 2.0 + m1 + 2.0 * nu - p.b[0]) +
                       p.d[1] / (2.0 * w * w) + m2 + 2.0 * nu - p.b[1];
  const double bound_hand = -theta / (2.0 * (1.0 + q));

  double err_rho = std::max(std::fabs(terms.rho[0] - rho1),
                            std::fabs(terms.rho[1] - rho2));
  auto r = criteria::theorem31_bound(terms, pi, 2.0, criteria::Formula::ex33);
  double theta_lib = -r.bound * 2.0 * (1.0 + q);
  double err_theta = std::fabs(theta_lib - theta);
  double err_bound = std::fabs(r.bound - bound_hand);

  bool pass = err_rho <= 1e-12 && err_theta <= 1e-12 && err_bound <= 1e-12;
  return {pass, "|rho err| " + fmt(err_rho) + ", |theta err| " + fmt(err_theta) +
                    ", |bound err| " + fmt(err_bound)};
}

// --- 6. The weight optimizer matches a 101x101 brute-force log grid. -------

Outcome optimizer_vs_grid() {
  auto g = ctmc::GeneratorMatrix::validate({{-1.0, 1.0}, {0.8, -0.8}});
  auto pi = ctmc::stationary_distribution(g);
  auto measure = jumps::JumpMeasure::atomic({1.5});
  auto profile = jumps::GammaProfile::atomic({{0.5, -0.3}});

  criteria::SemilinearParams p;
  p.nu = 1.0;
  p.b = {0.9, 0.4};
  p.d = {0.6, 1.1};
  p.moments = {jumps::jump_moments(measure, profile, 0),
               jumps::jump_moments(measure, profile, 1)};
  auto build = [&](const criteria::SigmaWeights& w) {
    return criteria::semilinear_terms(p, g, w);
  };

  double grid_best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      auto w = criteria::SigmaWeights::of(
          {std::pow(10.0, -3.0 + 0.06 * i), std::pow(10.0, -3.0 + 0.06 * j)});
      grid_best = std::min(
          grid_best,
          criteria::theorem31_bound(build(w), pi, 2.0, criteria::Formula::ex33)
              .bound);
    }
  }
  auto opt = criteria::optimize_sigma(build, pi, 2.0, criteria::Formula::ex33);
  bool close = opt.report.bound <= grid_best + 1e-4;

  // A regime-symmetric instance has nothing to gain; the optimizer must
  // come back with uniform weights.
  auto gs = ctmc::GeneratorMatrix::validate({{-1.0, 1.0}, {1.0, -1.0}});
  auto pis = ctmc::stationary_distribution(gs);
  auto sym_profile = jumps::GammaProfile::atomic({{0.4, 0.4}});
  auto sym_measure = jumps::JumpMeasure::atomic({1.0});
  criteria::SemilinearParams ps;
  ps.nu = 1.0;
  ps.b = {0.7, 0.7};
  ps.d = {0.5, 0.5};
  ps.moments = {jumps::jump_moments(sym_measure, sym_profile, 0),
                jumps::jump_moments(sym_measure, sym_profile, 1)};
  auto sym = criteria::optimize_sigma(
      [&](const criteria::SigmaWeights& w) {
        return criteria::semilinear_terms(ps, gs, w);
      },
      pis, 2.0, criteria::Formula::ex33);
  double sym_dev = std::max(std::fabs(sym.sigma[0] - 1.0),
                            std::fabs(sym.sigma[1] - 1.0));

  bool pass = close && sym_dev <= 1e-6;
  return {pass, "optimizer " + fmt(opt.report.bound, "%.6f") + " vs grid " +
                    fmt(grid_best, "%.6f") + ", symmetric deviation " +
                    fmt(sym_dev)};
}

// --- 7. Strong laws behind the ergodic argument: occupation fractions ------
// ---    and the normalized martingales at their decay rates.          ------

Outcome strong_laws() {
  auto g = ctmc::GeneratorMatrix::validate({{-1.0, 1.0}, {0.5, -0.5}});
  auto pi = ctmc::stationary_distribution(g).pi;

  const int seeds = 200;
  int occ_ok = 0;
  for (int p = 0; p < seeds; ++p) {
    auto stream = rng::make_stream(1, static_cast<std::uint64_t>(p),
                                   rng::Role::chain);
    auto path = ctmc::sample_switching_path(g, 0, 1e4, stream);
    auto occ = ctmc::occupation_fractions(path);
    if (std::fabs(occ[0] - pi[0]) <= 0.02 && std::fabs(occ[1] - pi[1]) <= 0.02)
      ++occ_ok;
  }

  const std::vector<double> beta = {1.0, 0.5};
  auto measure = jumps::JumpMeasure::atomic({1.5});
  auto profile = jumps::GammaProfile::atomic({{0.5, -0.3}});
  const double T = 1e3;
  engine::Scenario s(g, 0, spectral::SpectralBasis::dirichlet(1, std::acos(-1.0)),
                     spectral::mode_initial(1, 1.0, 1),
                     engine::LinearDynamics{{0.0, 0.0}, beta},
                     engine::JumpInputs{measure, profile}, T, 0.5);

  double log_sq = 0.0;
  for (int i = 0; i < 2; ++i)
    log_sq = std::max(log_sq, jumps::jump_moments(measure, profile, i).log_sq);
  const double tol1 = 4.0 * std::sqrt(1.0 / T);  // max beta^2 = 1
  const double tol2 = 4.0 * std::sqrt(log_sq / T);

  int ok1 = 0, ok2 = 0;
  for (int p = 0; p < seeds; ++p) {
    auto n = engine::generate_noise(s, static_cast<std::uint64_t>(p), 2024);
    double m1 = 0.0, comp = 0.0;
    std::size_t ev = 0;
    int state = n.switching.initial_state;
    for (std::size_t k = 0; k + 1 < n.timeline.size(); ++k) {
      while (ev < n.switching.events.size() &&
             n.switching.events[ev].time <= n.timeline[k])
        state = n.switching.events[ev++].state;
      m1 += beta[static_cast<std::size_t>(state)] * n.wiener[k];
      comp += s.comp_log(state) * (n.timeline[k + 1] - n.timeline[k]);
    }
    double jump_sum = 0.0;
    for (const auto& e : n.train.events)
      jump_sum += std::log1p(profile.value(n.switching.state_at(e.time), e.mark));
    if (std::fabs(m1 / T) <= tol1) ++ok1;
    if (std::fabs((jump_sum - comp) / T) <= tol2) ++ok2;
  }

  bool pass = occ_ok >= 190 && ok1 >= 190 && ok2 >= 190;
  return {pass, "occupation " + std::to_string(occ_ok) + "/200, diffusion " +
                    std::to_string(ok1) + "/200, jumps " + std::to_string(ok2) +
                    "/200 within bounds"};
}

// --- 8. Reports are byte-identical no matter how many workers run. ---------

Outcome worker_determinism() {
  auto a = (g_tmp / "workers1.json").string();
  auto b = (g_tmp / "workers8.json").string();
  int r1 = run_cli("exponent '" + scenario("geometric_jump_diffusion.json") +
                       "' --workers 1",
                   a);
  int r8 = run_cli("exponent '" + scenario("geometric_jump_diffusion.json") +
                       "' --workers 8",
                   b);
  if (r1 != 0 || r8 != 0) return {false, "exponent run failed"};
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  if (sa.str().empty()) return {false, "empty report"};
  bool same = sa.str() == sb.str();
  return {same, same ? std::to_string(sa.str().size()) + " bytes identical"
                     : "reports differ"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <cli-binary> <scenarios-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_scenarios = argv[2];
  g_tmp = std::filesystem::temp_directory_path() / "spdesim_acceptance";
  std::filesystem::create_directories(g_tmp);

  struct Criterion {
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"dt-ladder convergence against the closed-form solver", ladder_convergence},
      {"geometric jump diffusion CI brackets the known exponent", geometric_ci},
      {"switching stabilizes what every frozen regime cannot", stabilization},
      {"family bound at uniform weights equals the ergodic bound", bounds_agree},
      {"two-regime template matches hand-derived constants", closed_form_template},
      {"weight optimizer matches brute-force grid search", optimizer_vs_grid},
      {"occupation and martingale strong laws hold at rate", strong_laws},
      {"exponent reports are worker-count invariant", worker_determinism},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << (k + 1) << ". "
              << criteria[k].name << " (" << o.detail << ")\n";
  }
  std::cout << "acceptance: " << (criteria.size() - failed) << "/"
            << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
