#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "spdesim/errors.hpp"
#include "spdesim/exprlang.hpp"
#include "spdesim/rng.hpp"

namespace spdesim::jumps {

// Finite-activity jump intensity measure. Two shapes:
//   - atomic: a finite list of point masses; the k-th atom's "mark" is the
//     index k itself (scenario files attach per-regime coefficients to atoms
//     directly, so marks only need to identify the atom);
//   - parametric: total_rate times a probability density over marks y, given
//     as an expression in y. The default support is (0, inf), mapped to (0,1)
//     through y = t/(1-t) for quadrature; a finite [lo, hi] support is also
//     accepted (e.g. uniform-on-interval densities).
class JumpMeasure {
public:
  enum class Kind { atomic, parametric };

  static JumpMeasure atomic(std::vector<double> rates);
  static JumpMeasure parametric(
      double total_rate, exprlang::Expr density, double support_lo = 0.0,
      double support_hi = std::numeric_limits<double>::infinity());

  Kind kind() const { return kind_; }
  double total_rate() const { return total_rate_; }

  std::size_t atom_count() const { return atom_rates_.size(); }
  double atom_rate(std::size_t k) const { return atom_rates_[k]; }

  const exprlang::Expr& density() const { return density_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  bool unbounded() const { return hi_ == std::numeric_limits<double>::infinity(); }

  // One mark from the normalized measure (atom index / density draw).
  double sample_mark(rng::Stream& stream) const;

  // 1024 representative marks spread over the support; used for pointwise
  // hypothesis checks on parametric coefficient expressions.
  std::vector<double> probe_marks() const;

private:
  JumpMeasure() = default;

  Kind kind_ = Kind::atomic;
  double total_rate_ = 0.0;
  std::vector<double> atom_rates_;

  exprlang::Expr density_;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> cdf_;  // cumulative cell masses for inverse sampling
};

// Integral of f against the measure: sum of rate_k * f(k) over atoms, or
// total_rate * integral of f(y) density(y) dy by adaptive 15-point
// Gauss-Legendre quadrature (relative tolerance 1e-8, budget 2^15 nodes).
double integrate_functional(const JumpMeasure& measure,
                            const std::function<double(double)>& f);

// Per-regime jump coefficient gamma_i(mark); gamma > -1 everywhere on the
// support (verified on atoms, or on probe marks for expressions).
class GammaProfile {
public:
  // per_atom[k][i] = coefficient of atom k in regime i.
  static GammaProfile atomic(std::vector<std::vector<double>> per_atom);
  // One expression in y per regime, checked against the measure's support.
  static GammaProfile parametric(std::vector<exprlang::Expr> per_regime,
                                 const JumpMeasure& measure);

  int regime_count() const { return regimes_; }
  double value(int regime, double mark) const;

private:
  GammaProfile() = default;

  JumpMeasure::Kind kind_ = JumpMeasure::Kind::atomic;
  int regimes_ = 0;
  std::vector<std::vector<double>> per_atom_;  // [atom][regime]
  std::vector<exprlang::Expr> exprs_;          // [regime]
};

// The five jump functionals the stability formulas consume, all integrals
// against the measure of pointwise maps of gamma:
//   gamma_sq = I[g^2]            mu     = I[ln(1+g) - g]        (<= 0)
//   m_small  = I[2g - 2ln(1+g)]  log_sq = I[ln(1+g)^2]
//   delta    = gamma_sq + m_small, stored as that exact sum      (>= 0)
struct JumpMoments {
  double gamma_sq = 0.0;
  double mu = 0.0;
  double m_small = 0.0;
  double log_sq = 0.0;
  double delta = 0.0;
};

JumpMoments jump_moments(const JumpMeasure& measure, const GammaProfile& profile,
                         int regime);

// Marked Poisson train on [0, T]: exponential inter-arrival times at the
// total rate, i.i.d. marks from the normalized measure.
struct JumpTrain {
  struct Event {
    double time;
    double mark;
    bool operator==(const Event&) const = default;
  };
  std::vector<Event> events;
};

JumpTrain sample_jump_train(const JumpMeasure& measure, double T,
                            rng::Stream& stream);

}  // namespace spdesim::jumps
