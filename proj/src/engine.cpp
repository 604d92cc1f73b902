#include "spdesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdesim/errors.hpp"

namespace spdesim::engine {

namespace {

const double kLnFloor = std::log(1e-150);  // extinction threshold for ln|X|
const double kLnCeil = std::log(1e300);    // explosion threshold

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

double checked_gamma(const jumps::GammaProfile& profile, int regime,
                     double mark) {
  const double g = profile.value(regime, mark);
  if (!(g > -1.0))
    fail(Errc::gamma_out_of_range,
         "jump coefficient " + std::to_string(g) + " in regime " +
             std::to_string(regime + 1) + " is not > -1");
  return g;
}

// ln of the coefficient 2-norm, scaled by the largest entry so that states
// near the explosion threshold do not overflow when squared.
double mode_ln_norm(const std::vector<double>& u) {
  double peak = 0.0;
  for (double v : u) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (double v : u) {
    const double r = v / peak;
    s += r * r;
  }
  return std::log(peak) + 0.5 * std::log(s);
}

// Tracks the floor/ceiling flags shared by both integrators. Once a flag is
// raised the recorded value is held constant.
struct NormGuard {
  bool frozen = false;
  double held = 0.0;

  double record(Trajectory& out, double t, double ln) {
    if (frozen) return held;
    if (!(ln >= kLnFloor)) {  // catches -inf and NaN as well
      out.extinct = true;
      out.extinction_time = t;
      frozen = true;
      held = std::isfinite(ln) ? ln : kLnFloor;
      return held;
    }
    if (!(ln <= kLnCeil)) {
      out.exploded = true;
      out.explosion_time = t;
      frozen = true;
      held = std::isfinite(ln) ? ln : kLnCeil;
      return held;
    }
    return ln;
  }
};

// Walks the switching path alongside the timeline without rescanning its
// event list; the regime returned for time t is the right-continuous state.
struct RegimeCursor {
  const ctmc::SwitchingPath& path;
  std::size_t next = 0;
  int state;

  explicit RegimeCursor(const ctmc::SwitchingPath& p)
      : path(p), state(p.initial_state) {}

  int at(double t) {
    while (next < path.events.size() && path.events[next].time <= t)
      state = path.events[next++].state;
    return state;
  }
};

}  // namespace

Scenario::Scenario(ctmc::GeneratorMatrix generator, int r0,
                   spectral::SpectralBasis basis, spectral::ModeVector initial,
                   Dynamics dynamics, std::optional<JumpInputs> jump_inputs,
                   double horizon, double dt)
    : generator_(std::move(generator)),
      r0_(r0),
      basis_(std::move(basis)),
      initial_(std::move(initial)),
      dynamics_(std::move(dynamics)),
      jumps_(std::move(jump_inputs)),
      horizon_(horizon),
      dt_(dt) {
  const int m = generator_.size();
  if (r0_ < 0 || r0_ >= m)
    fail(Errc::domain_violation, "initial regime out of range");
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
    fail(Errc::domain_violation, "horizon must be positive and finite");
  if (!(dt_ > 0.0) || !(dt_ <= horizon_))
    fail(Errc::domain_violation, "dt must lie in (0, horizon]");
  if (horizon_ / dt_ > 1e9)
    fail(Errc::domain_violation, "grid would exceed 1e9 steps");

  if (initial_.size() != basis_.mode_count())
    fail(Errc::domain_violation,
         "initial data has " + std::to_string(initial_.size()) +
             " coefficients for " + std::to_string(basis_.mode_count()) +
             " modes");
  if (!all_finite(initial_.coefficients))
    fail(Errc::domain_violation, "initial coefficients must be finite");
  if (std::all_of(initial_.coefficients.begin(), initial_.coefficients.end(),
                  [](double c) { return c == 0.0; }))
    fail(Errc::all_zero, "initial data is identically zero");

  if (const auto* lin = std::get_if<LinearDynamics>(&dynamics_)) {
    if (static_cast<int>(lin->alpha_bar.size()) != m ||
        static_cast<int>(lin->beta_bar.size()) != m)
      fail(Errc::domain_violation,
           "linear coefficient arrays must have one entry per regime");
    if (!all_finite(lin->alpha_bar) || !all_finite(lin->beta_bar))
      fail(Errc::domain_violation, "linear coefficients must be finite");
  } else {
    const auto& semi = std::get<SemilinearDynamics>(dynamics_);
    if (static_cast<int>(semi.drift.size()) != m ||
        static_cast<int>(semi.diffusion.size()) != m)
      fail(Errc::domain_violation,
           "semilinear expression arrays must have one entry per regime");
    for (const auto& e : semi.drift)
      if (e.variables() != std::vector<std::string>{"x"})
        fail(Errc::domain_violation, "drift must be an expression in x");
    for (const auto& e : semi.diffusion)
      if (e.variables() != std::vector<std::string>{"x"})
        fail(Errc::domain_violation, "diffusion must be an expression in x");
    if (!(semi.nu > 0.0) || !std::isfinite(semi.nu))
      fail(Errc::domain_violation, "nu must be positive");
    if (basis_.kind() != spectral::SpectralBasis::Kind::dirichlet_interval)
      fail(Errc::domain_violation,
           "semilinear dynamics need a grid, which a bare eigenvalue list "
           "does not provide");
    if (semi.collocation != 0 && semi.collocation < basis_.mode_count())
      fail(Errc::under_resolved,
           "collocation grid coarser than the mode count");
  }

  comp_gamma_.assign(static_cast<std::size_t>(m), 0.0);
  comp_log_.assign(static_cast<std::size_t>(m), 0.0);
  if (jumps_) {
    if (jumps_->profile.regime_count() != m)
      fail(Errc::domain_violation,
           "jump profile covers " + std::to_string(jumps_->profile.regime_count()) +
               " regimes, generator has " + std::to_string(m));
    for (int i = 0; i < m; ++i) {
      for (double y : jumps_->measure.probe_marks())
        (void)checked_gamma(jumps_->profile, i, y);
      comp_gamma_[static_cast<std::size_t>(i)] = jumps::integrate_functional(
          jumps_->measure,
          [&](double y) { return jumps_->profile.value(i, y); });
      comp_log_[static_cast<std::size_t>(i)] = jumps::integrate_functional(
          jumps_->measure,
          [&](double y) { return std::log1p(checked_gamma(jumps_->profile, i, y)); });
    }
  }
}

DrivingNoise generate_noise(const Scenario& s, std::uint64_t path_id,
                            std::uint64_t master_seed) {
  DrivingNoise out;
  out.master_seed = master_seed;
  out.path_id = path_id;
  out.dt = s.dt();

  auto chain_stream = rng::make_stream(master_seed, path_id, rng::Role::chain);
  out.switching = ctmc::sample_switching_path(s.generator(), s.r0(),
                                              s.horizon(), chain_stream);

  if (s.jump_inputs()) {
    auto jump_stream = rng::make_stream(master_seed, path_id, rng::Role::jumps);
    out.train = jumps::sample_jump_train(s.jump_inputs()->measure, s.horizon(),
                                         jump_stream);
  }

  std::vector<double> pts;
  for (std::uint64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * s.dt();
    if (!(t < s.horizon())) break;
    pts.push_back(t);
  }
  pts.push_back(s.horizon());
  for (const auto& e : out.switching.events) pts.push_back(e.time);
  for (const auto& e : out.train.events) pts.push_back(e.time);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  out.timeline = std::move(pts);

  auto wiener_stream = rng::make_stream(master_seed, path_id, rng::Role::wiener);
  out.wiener.resize(out.timeline.size() - 1);
  for (std::size_t k = 0; k + 1 < out.timeline.size(); ++k) {
    const double h = out.timeline[k + 1] - out.timeline[k];
    out.wiener[k] = std::sqrt(h) * wiener_stream.normal();
  }
  return out;
}

DrivingNoise refine_noise(const DrivingNoise& coarse, double finer_dt) {
  const double T = coarse.switching.horizon;
  if (!(finer_dt > 0.0) || !(finer_dt <= T))
    fail(Errc::domain_violation, "refined dt must lie in (0, horizon]");

  DrivingNoise out;
  out.switching = coarse.switching;
  out.train = coarse.train;
  out.master_seed = coarse.master_seed;
  out.path_id = coarse.path_id;
  out.dt = finer_dt;
  out.level = coarse.level + 1;

  std::vector<double> pts = coarse.timeline;
  for (std::uint64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * finer_dt;
    if (!(t < T)) break;
    pts.push_back(t);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  out.timeline = std::move(pts);

  // Conditionally fill each coarse interval: interior increments are drawn
  // from the Brownian bridge, the final one is the exact remainder, so the
  // sub-increments always sum to the coarse increment bit for bit.
  auto bridge = rng::make_stream(coarse.master_seed, coarse.path_id,
                                 rng::Role::wiener_refine,
                                 static_cast<std::uint64_t>(out.level));
  out.wiener.resize(out.timeline.size() - 1);
  std::size_t fine = 0;
  for (std::size_t k = 0; k + 1 < coarse.timeline.size(); ++k) {
    const double b = coarse.timeline[k + 1];
    double t = coarse.timeline[k];
    double rem = coarse.wiener[k];
    while (out.timeline[fine + 1] < b) {
      const double h = out.timeline[fine + 1] - t;
      const double H = b - t;
      const double inc =
          rem * (h / H) + std::sqrt(h * (H - h) / H) * bridge.normal();
      out.wiener[fine] = inc;
      rem -= inc;
      t = out.timeline[++fine];
    }
    out.wiener[fine++] = rem;
  }
  return out;
}

Trajectory exact_linear_path(const Scenario& s, const DrivingNoise& noise) {
  if (!s.is_linear())
    fail(Errc::not_linear, "the closed form covers only linear dynamics");
  const auto& dyn = std::get<LinearDynamics>(s.dynamics());

  const double norm0 = spectral::h_norm(s.initial());
  const double ln0 = std::log(norm0);
  struct ActiveMode {
    int slot;
    double lambda;
    double ln_weight;  // ln |u_n / |u||
    double signed_weight;
  };
  std::vector<ActiveMode> active;
  for (int n = 0; n < s.initial().size(); ++n) {
    const double c = s.initial().coefficients[static_cast<std::size_t>(n)];
    if (c == 0.0) continue;
    const double w = c / norm0;
    active.push_back({n, s.basis().eigenvalue(n + 1), std::log(std::fabs(w)), w});
  }

  // (1/2) lse over active modes of 2(ln|w_n| - lambda_n t).
  auto shape = [&](double t) {
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& a : active)
      peak = std::max(peak, a.ln_weight - a.lambda * t);
    double sum = 0.0;
    for (const auto& a : active)
      sum += std::exp(2.0 * (a.ln_weight - a.lambda * t - peak));
    return peak + 0.5 * std::log(sum);
  };

  Trajectory out;
  const auto& tl = noise.timeline;
  out.times = tl;
  out.ln_norm.resize(tl.size());
  out.regime.resize(tl.size());

  RegimeCursor cursor(noise.switching);
  NormGuard guard;

  double drift_int = 0.0;  // integral of alpha_bar(r)
  double log_factor = 0.0; // E(t)
  double freeze_time = tl.back();
  double freeze_drift = 0.0, freeze_factor = 0.0;
  bool frozen_state = false;

  out.regime[0] = cursor.at(0.0);
  out.ln_norm[0] = guard.record(out, 0.0, ln0 + shape(0.0));

  std::size_t jump_next = 0;
  for (std::size_t k = 0; k + 1 < tl.size(); ++k) {
    const int i = cursor.at(tl[k]);
    const double t1 = tl[k + 1];
    out.regime[k + 1] = cursor.at(t1);
    if (guard.frozen) {
      if (!frozen_state) {
        frozen_state = true;
        freeze_time = tl[k];
        freeze_drift = drift_int;
        freeze_factor = log_factor;
      }
      out.ln_norm[k + 1] = guard.held;
      continue;
    }

    const auto si = static_cast<std::size_t>(i);
    const double delta = t1 - tl[k];
    const double ab = dyn.alpha_bar[si];
    const double bb = dyn.beta_bar[si];
    drift_int += ab * delta;
    log_factor += (-0.5 * bb * bb - s.comp_gamma(i)) * delta + bb * noise.wiener[k];

    while (jump_next < noise.train.events.size() &&
           noise.train.events[jump_next].time <= t1) {
      const auto& ev = noise.train.events[jump_next++];
      if (ev.time < t1) continue;  // already folded in at an earlier point
      log_factor += std::log1p(checked_gamma(s.jump_inputs()->profile, i, ev.mark));
    }

    out.ln_norm[k + 1] =
        guard.record(out, t1, ln0 + drift_int + log_factor + shape(t1));
  }
  if (!frozen_state) {
    freeze_time = tl.back();
    freeze_drift = drift_int;
    freeze_factor = log_factor;
  }

  out.terminal.coefficients.resize(static_cast<std::size_t>(s.initial().size()), 0.0);
  for (const auto& a : active) {
    const double ln_mag =
        ln0 + a.ln_weight - a.lambda * freeze_time + freeze_drift + freeze_factor;
    out.terminal.coefficients[static_cast<std::size_t>(a.slot)] =
        std::copysign(std::exp(std::min(ln_mag, 709.0)), a.signed_weight);
  }
  return out;
}

Trajectory numerical_path(const Scenario& s, const DrivingNoise& noise) {
  const int modes = s.basis().mode_count();
  std::vector<double> u = s.initial().coefficients;

  const auto* lin = std::get_if<LinearDynamics>(&s.dynamics());
  const auto* semi = std::get_if<SemilinearDynamics>(&s.dynamics());
  const double nu = semi ? semi->nu : 1.0;

  std::optional<spectral::SineTransform> transform;
  if (semi) {
    const int grid = semi->collocation > 0 ? semi->collocation : 2 * modes;
    transform.emplace(s.basis(), grid);
  }

  Trajectory out;
  const auto& tl = noise.timeline;
  out.times = tl;
  out.ln_norm.resize(tl.size());
  out.regime.resize(tl.size());

  RegimeCursor cursor(noise.switching);
  NormGuard guard;

  out.regime[0] = cursor.at(0.0);
  out.ln_norm[0] = guard.record(out, 0.0, mode_ln_norm(u));

  std::vector<double> star(static_cast<std::size_t>(modes));
  std::size_t jump_next = 0;
  for (std::size_t k = 0; k + 1 < tl.size(); ++k) {
    const int i = cursor.at(tl[k]);
    const double t1 = tl[k + 1];
    out.regime[k + 1] = cursor.at(t1);
    if (guard.frozen) {
      out.ln_norm[k + 1] = guard.held;
      continue;
    }

    const auto si = static_cast<std::size_t>(i);
    const double delta = t1 - tl[k];
    const double dw = noise.wiener[k];

    for (int n = 0; n < modes; ++n)
      star[static_cast<std::size_t>(n)] =
          std::exp(-nu * s.basis().eigenvalue(n + 1) * delta) *
          u[static_cast<std::size_t>(n)];

    if (lin) {
      const double factor = 1.0 + (lin->alpha_bar[si] - s.comp_gamma(i)) * delta +
                            lin->beta_bar[si] * dw;
      for (int n = 0; n < modes; ++n)
        u[static_cast<std::size_t>(n)] = star[static_cast<std::size_t>(n)] * factor;
    } else {
      spectral::ModeVector mv{star};
      auto field = transform->synthesize(mv);
      spectral::GridField fval, gval;
      fval.values.resize(field.values.size());
      gval.values.resize(field.values.size());
      for (std::size_t j = 0; j < field.values.size(); ++j) {
        fval.values[j] = semi->drift[si].eval(field.values[j]);
        gval.values[j] = semi->diffusion[si].eval(field.values[j]);
      }
      const auto fm = transform->analyze(fval);
      const auto gm = transform->analyze(gval);
      for (int n = 0; n < modes; ++n) {
        const auto sn = static_cast<std::size_t>(n);
        u[sn] = star[sn] + delta * (fm.coefficients[sn] - s.comp_gamma(i) * star[sn]) +
                dw * gm.coefficients[sn];
      }
    }

    while (jump_next < noise.train.events.size() &&
           noise.train.events[jump_next].time <= t1) {
      const auto& ev = noise.train.events[jump_next++];
      if (ev.time < t1) continue;
      const double g = checked_gamma(s.jump_inputs()->profile, i, ev.mark);
      for (double& c : u) c *= 1.0 + g;
    }

    out.ln_norm[k + 1] = guard.record(out, t1, mode_ln_norm(u));
  }

  out.terminal.coefficients = std::move(u);
  return out;
}

}  // namespace spdesim::engine
