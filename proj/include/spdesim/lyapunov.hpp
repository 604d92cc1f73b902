#pragma once

#include <vector>

#include "spdesim/engine.hpp"
#include "spdesim/verdict.hpp"

namespace spdesim::lyapunov {

// Two estimators of lim (1/t) ln |X(t)| on the window [t_b, t_e]: the
// endpoint quotient (unbiased for the almost-sure limit, high variance) and
// the least-squares slope of ln_norm against t (smoother). Disagreement
// between the two is the practical alarm that the window is too short.
struct ExponentEstimate {
  double terminal_quotient = 0.0;
  double regression_slope = 0.0;
  double window_begin = 0.0;
  double window_end = 0.0;
  bool extinct = false;
};

// Both estimators over [burn_in_fraction * T, T], truncated at the
// extinction or explosion time if one was flagged. Requires at least ten
// samples inside the window.
ExponentEstimate pathwise_exponent(const engine::Trajectory& traj,
                                   double burn_in_fraction = 0.2);

// Aggregate over the non-extinct terminal quotients: Student-t two-sided 95%
// confidence interval, verdict by its sign. Extinct paths are counted but
// excluded from the mean (their frozen tails say "stable" louder than any
// slope could, but would corrupt it).
struct EnsembleReport {
  std::vector<ExponentEstimate> estimates;
  double mean = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int paths = 0;
  int extinct = 0;
  Verdict verdict = Verdict::inconclusive;
};

EnsembleReport ensemble_exponent(std::vector<ExponentEstimate> estimates);

}  // namespace spdesim::lyapunov
