#include "spdesim/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "spdesim/errors.hpp"

namespace spdesim::lyapunov {

ExponentEstimate pathwise_exponent(const engine::Trajectory& traj,
                                   double burn_in_fraction) {
  if (!(burn_in_fraction >= 0.0) || !(burn_in_fraction < 1.0))
    fail(Errc::domain_violation, "burn-in fraction must lie in [0, 1)");
  if (traj.times.empty())
    fail(Errc::window_too_short, "empty trajectory");

  const double horizon = traj.times.back();
  const double t_begin = burn_in_fraction * horizon;
  const double t_end =
      std::min({horizon, traj.extinction_time, traj.explosion_time});

  std::size_t lo = 0;
  while (lo < traj.times.size() && traj.times[lo] < t_begin) ++lo;
  std::size_t hi = lo;
  while (hi < traj.times.size() && traj.times[hi] <= t_end) ++hi;
  const std::size_t count = hi - lo;
  if (count < 10)
    fail(Errc::window_too_short,
         "only " + std::to_string(count) +
             " samples between burn-in and the window end; need 10");

  ExponentEstimate out;
  out.window_begin = traj.times[lo];
  out.window_end = traj.times[hi - 1];
  out.extinct = traj.extinct;
  out.terminal_quotient = (traj.ln_norm[hi - 1] - traj.ln_norm[lo]) /
                          (out.window_end - out.window_begin);

  double mean_t = 0.0, mean_y = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    mean_t += traj.times[k];
    mean_y += traj.ln_norm[k];
  }
  mean_t /= static_cast<double>(count);
  mean_y /= static_cast<double>(count);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double dt = traj.times[k] - mean_t;
    sxy += dt * (traj.ln_norm[k] - mean_y);
    sxx += dt * dt;
  }
  out.regression_slope = sxy / sxx;
  return out;
}

EnsembleReport ensemble_exponent(std::vector<ExponentEstimate> estimates) {
  EnsembleReport out;
  out.paths = static_cast<int>(estimates.size());
  out.estimates = std::move(estimates);

  std::vector<double> values;
  for (const auto& e : out.estimates) {
    if (e.extinct)
      ++out.extinct;
    else
      values.push_back(e.terminal_quotient);
  }
  const auto n = static_cast<int>(values.size());
  if (n < 2)
    fail(Errc::too_few_paths,
         "need at least 2 non-extinct paths, have " + std::to_string(n));

  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std_error = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));

  const boost::math::students_t dist(n - 1);
  const double half = boost::math::quantile(dist, 0.975) * out.std_error;
  out.ci_lo = out.mean - half;
  out.ci_hi = out.mean + half;

  if (out.ci_hi < 0.0)
    out.verdict = Verdict::stable;
  else if (out.ci_lo > 0.0)
    out.verdict = Verdict::unstable;
  else
    out.verdict = Verdict::inconclusive;
  return out;
}

}  // namespace spdesim::lyapunov
