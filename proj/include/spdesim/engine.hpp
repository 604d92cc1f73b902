#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "spdesim/ctmc.hpp"
#include "spdesim/exprlang.hpp"
#include "spdesim/jumps.hpp"
#include "spdesim/rng.hpp"
#include "spdesim/spectral.hpp"

namespace spdesim::engine {

// Mode-diagonal class: drift alpha_bar_i * u and scalar noise beta_bar_i * u
// per regime, on top of the heat semigroup.
struct LinearDynamics {
  std::vector<double> alpha_bar;
  std::vector<double> beta_bar;
};

// Pointwise (Nemytskii) class: du = [nu*Laplace u + f(u, i)]dt + g(u, i)dW
// with one scalar Wiener process. f and g are expressions in the single
// variable x, evaluated on a collocation grid and projected back onto the
// modes each step.
struct SemilinearDynamics {
  std::vector<exprlang::Expr> drift;      // f per regime
  std::vector<exprlang::Expr> diffusion;  // g per regime
  double nu = 1.0;
  int collocation = 0;  // grid size; 0 means twice the mode count
};

using Dynamics = std::variant<LinearDynamics, SemilinearDynamics>;

struct JumpInputs {
  jumps::JumpMeasure measure;
  jumps::GammaProfile profile;
};

// A fully validated simulation problem. Construction checks the cross-field
// invariants (array lengths against the regime count, 0 < dt <= T, nonzero
// initial data, jump coefficients > -1 on the measure's support) and caches
// the per-regime compensator rates
//   comp_gamma_i = integral of gamma_i dlambda,
//   comp_log_i   = integral of ln(1 + gamma_i) dlambda,
// which both integrators consume on every interval.
class Scenario {
public:
  Scenario(ctmc::GeneratorMatrix generator, int r0, spectral::SpectralBasis basis,
           spectral::ModeVector initial, Dynamics dynamics,
           std::optional<JumpInputs> jump_inputs, double horizon, double dt);

  const ctmc::GeneratorMatrix& generator() const { return generator_; }
  int r0() const { return r0_; }
  const spectral::SpectralBasis& basis() const { return basis_; }
  const spectral::ModeVector& initial() const { return initial_; }
  const Dynamics& dynamics() const { return dynamics_; }
  const std::optional<JumpInputs>& jump_inputs() const { return jumps_; }
  double horizon() const { return horizon_; }
  double dt() const { return dt_; }

  int regimes() const { return generator_.size(); }
  bool is_linear() const {
    return std::holds_alternative<LinearDynamics>(dynamics_);
  }
  double comp_gamma(int regime) const {
    return comp_gamma_[static_cast<std::size_t>(regime)];
  }
  double comp_log(int regime) const {
    return comp_log_[static_cast<std::size_t>(regime)];
  }

private:
  ctmc::GeneratorMatrix generator_;
  int r0_;
  spectral::SpectralBasis basis_;
  spectral::ModeVector initial_;
  Dynamics dynamics_;
  std::optional<JumpInputs> jumps_;
  double horizon_;
  double dt_;
  std::vector<double> comp_gamma_;
  std::vector<double> comp_log_;
};

// One path's worth of driving randomness, realized on the event-aligned
// timeline: the sorted, deduplicated union of the uniform grid {k dt}, the
// horizon, the chain's switch times and the jump times. wiener[k] is the
// Brownian increment over [timeline[k], timeline[k+1]].
struct DrivingNoise {
  ctmc::SwitchingPath switching;
  jumps::JumpTrain train;
  std::vector<double> timeline;
  std::vector<double> wiener;
  std::uint64_t master_seed = 0;
  std::uint64_t path_id = 0;
  double dt = 0.0;
  int level = 0;  // number of refinements applied
};

// Chain, jump train and Wiener increments drawn from three independent
// streams derived from (master_seed, path_id, role).
DrivingNoise generate_noise(const Scenario& s, std::uint64_t path_id,
                            std::uint64_t master_seed);

// The same underlying Brownian path expressed on a finer timeline (union of
// the old one and the finer uniform grid). New interior increments are
// bridge-conditioned on each coarse increment and sum to it exactly, so
// trajectories at dt and dt/2 see one common noise path.
DrivingNoise refine_noise(const DrivingNoise& coarse, double finer_dt);

// ln |X(t)|_H sampled at every timeline point, plus the regime in effect
// there (right-continuous) and the terminal coefficients. If the norm leaves
// [1e-150, 1e300] the corresponding flag is set and ln_norm is frozen at the
// crossing value from that time on.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> ln_norm;
  std::vector<int> regime;
  spectral::ModeVector terminal;
  bool extinct = false;
  bool exploded = false;
  double extinction_time = std::numeric_limits<double>::infinity();
  double explosion_time = std::numeric_limits<double>::infinity();
};

// Closed-form solution of the mode-diagonal class on the given noise:
//   ln |X(t)| = ln |u0| + A(t) + E(t) + (1/2) lse_n 2(ln |w_n| - lambda_n t)
// with w = u0 normalized, A the running integral of alpha_bar(r), and E the
// scalar log-factor accumulating -beta_bar^2/2 - comp_gamma per unit time,
// beta_bar dW, and ln(1 + gamma) at each jump. Every integral is an exact
// finite sum because the regime is constant between timeline points.
Trajectory exact_linear_path(const Scenario& s, const DrivingNoise& noise);

// Exponential Euler on the same timeline: each mode is advanced by its exact
// semigroup factor, then drift * dt and diffusion * dW are added (with the
// jump compensator -comp_gamma * u * dt folded into the drift); at jump
// times every mode is multiplied by 1 + gamma(r(tau-), y).
Trajectory numerical_path(const Scenario& s, const DrivingNoise& noise);

}  // namespace spdesim::engine
