#include "spdesim/criteria.hpp"

#include <algorithm>
#include <cmath>

namespace spdesim::criteria {

namespace {

constexpr double kSigmaLo = 1e-3;
constexpr double kSigmaHi = 1e3;

void check_regime_count(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    fail(Errc::domain_violation, std::string(what) + " lists " +
                                     std::to_string(got) + " regimes, expected " +
                                     std::to_string(want));
}

const jumps::JumpMoments& moment_or_zero(
    const std::vector<jumps::JumpMoments>& moments, std::size_t i) {
  static const jumps::JumpMoments zero{};
  return moments.empty() ? zero : moments[i];
}

// The switching contributions shared by both parameter classes:
//   coupling_i = sum_j gamma_ij sigma_j / sigma_i   (enters alpha_i)
//   rho_i      = sum_j gamma_ij [ln(sigma_j/sigma_i) - sigma_j/sigma_i]
void switching_terms(const ctmc::GeneratorMatrix& g, const SigmaWeights& sigma,
                     std::vector<double>& coupling, std::vector<double>& rho) {
  const int m = g.size();
  coupling.assign(static_cast<std::size_t>(m), 0.0);
  rho.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    // Off-diagonal entries first, the diagonal last: the diagonal is the
    // negated sum of the others in this same order, so for uniform weights
    // both sums telescope to exactly zero.
    double c = 0.0, r = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const double ratio = sigma[j] / sigma[i];
      c += g.rate(i, j) * ratio;
      r += g.rate(i, j) * (std::log(ratio) - ratio);
    }
    c += g.rate(i, i);
    r += -g.rate(i, i);
    coupling[static_cast<std::size_t>(i)] = c;
    rho[static_cast<std::size_t>(i)] = r;
  }
}

double certified_decay(const RegimeCriterionTerms& t, std::span<const double> pi) {
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i)
    s += pi[i] * (0.5 * t.beta[i] + t.delta[i] - t.alpha[i] - t.rho[i]);
  return s;
}

Verdict verdict_of(double bound) {
  if (bound < 0.0) return Verdict::stable;
  if (bound > 0.0) return Verdict::unstable;
  return Verdict::inconclusive;
}

// Ergodic drift average shared by the bound and the exact exponent, computed
// identically so the two formulas differ only in the leading eigenvalue.
double ergodic_drift_sum(const LinearParams& params, std::span<const double> pi) {
  double s = 0.0;
  for (std::size_t j = 0; j < pi.size(); ++j) {
    const double bb = params.beta_bar[j];
    s += pi[j] * (params.alpha_bar[j] - 0.5 * bb * bb +
                  moment_or_zero(params.moments, j).mu);
  }
  return s;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

const char* formula_name(Formula f) {
  switch (f) {
    case Formula::thm31: return "thm31";
    case Formula::thm41: return "thm41";
    case Formula::thm44: return "thm44";
    case Formula::ex33: return "ex33";
    case Formula::ex45: return "ex45";
  }
  return "?";
}

SigmaWeights SigmaWeights::uniform(int regimes) {
  if (regimes < 1) fail(Errc::domain_violation, "need at least one regime");
  SigmaWeights w;
  w.sigma_.assign(static_cast<std::size_t>(regimes), 1.0);
  return w;
}

SigmaWeights SigmaWeights::of(std::vector<double> sigma) {
  if (sigma.empty()) fail(Errc::domain_violation, "need at least one weight");
  double lo = sigma.front();
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s))
      fail(Errc::domain_violation,
           "Lyapunov weights must be positive, got " + std::to_string(s));
    lo = std::min(lo, s);
  }
  for (double& s : sigma) s /= lo;
  SigmaWeights w;
  w.sigma_ = std::move(sigma);
  return w;
}

RegimeCriterionTerms linear_terms(const LinearParams& params,
                                  const ctmc::GeneratorMatrix& g,
                                  const SigmaWeights& sigma) {
  const std::size_t m = static_cast<std::size_t>(g.size());
  check_regime_count(params.alpha_bar.size(), m, "alpha_bar");
  check_regime_count(params.beta_bar.size(), m, "beta_bar");
  if (!params.moments.empty()) check_regime_count(params.moments.size(), m, "moments");
  check_regime_count(static_cast<std::size_t>(sigma.size()), m, "sigma");
  if (!(params.lambda1 > 0.0))
    fail(Errc::domain_violation, "leading eigenvalue must be positive");

  std::vector<double> coupling, rho;
  switching_terms(g, sigma, coupling, rho);

  RegimeCriterionTerms t;
  t.alpha.resize(m);
  t.beta.resize(m);
  t.delta.resize(m);
  t.rho = std::move(rho);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& mom = moment_or_zero(params.moments, i);
    const double bb = params.beta_bar[i];
    t.alpha[i] = -2.0 * params.lambda1 + 2.0 * params.alpha_bar[i] + bb * bb +
                 mom.gamma_sq + coupling[i];
    t.beta[i] = 4.0 * bb * bb;
    t.delta[i] = mom.delta;
  }
  return t;
}

RegimeCriterionTerms semilinear_terms(const SemilinearParams& params,
                                      const ctmc::GeneratorMatrix& g,
                                      const SigmaWeights& sigma) {
  const std::size_t m = static_cast<std::size_t>(g.size());
  check_regime_count(params.b.size(), m, "b");
  check_regime_count(params.d.size(), m, "d");
  if (!params.moments.empty()) check_regime_count(params.moments.size(), m, "moments");
  check_regime_count(static_cast<std::size_t>(sigma.size()), m, "sigma");
  if (!(params.nu > 0.0))
    fail(Errc::domain_violation, "diffusion lower bound nu must be positive");
  for (std::size_t i = 0; i < m; ++i)
    if (!(params.d[i] > 0.0))
      fail(Errc::nonpositive_d, "d must be positive in every regime; regime " +
                                    std::to_string(i + 1) + " has d = " +
                                    std::to_string(params.d[i]));

  std::vector<double> coupling, rho;
  switching_terms(g, sigma, coupling, rho);

  RegimeCriterionTerms t;
  t.alpha.resize(m);
  t.beta.resize(m);
  t.delta.resize(m);
  t.rho = std::move(rho);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& mom = moment_or_zero(params.moments, i);
    t.alpha[i] = -2.0 * params.nu + params.b[i] + mom.gamma_sq + coupling[i];
    t.beta[i] = params.d[i] / (sigma[static_cast<int>(i)] * sigma[static_cast<int>(i)]);
    t.delta[i] = mom.delta;
  }
  return t;
}

CriterionReport theorem31_bound(const RegimeCriterionTerms& terms,
                                const ctmc::StationaryDistribution& pi,
                                double p, Formula tag, const SigmaWeights* sigma) {
  if (!(p > 0.0)) fail(Errc::domain_violation, "p must be positive");
  check_regime_count(pi.pi.size(), static_cast<std::size_t>(terms.regimes()),
                     "stationary distribution");

  CriterionReport r;
  r.terms = terms;
  r.pi = pi.pi;
  if (sigma)
    r.sigma.assign(sigma->values().begin(), sigma->values().end());
  r.p = p;
  r.bound = -certified_decay(terms, pi.pi) / p;
  r.exact = false;
  r.verdict = verdict_of(r.bound);
  r.formula = tag;
  return r;
}

CriterionReport theorem41_bound(const LinearParams& params,
                                const ctmc::StationaryDistribution& pi) {
  check_regime_count(params.alpha_bar.size(), pi.pi.size(), "alpha_bar");
  check_regime_count(params.beta_bar.size(), pi.pi.size(), "beta_bar");
  if (!params.moments.empty())
    check_regime_count(params.moments.size(), pi.pi.size(), "moments");

  CriterionReport r;
  r.pi = pi.pi;
  r.bound = -params.lambda1 + ergodic_drift_sum(params, pi.pi);
  r.exact = false;
  r.verdict = verdict_of(r.bound);
  r.formula = Formula::thm41;
  if (!params.moments.empty())
    r.note = "jump term evaluated with the summation regime's coefficients";
  return r;
}

CriterionReport theorem44_exact(const LinearParams& params,
                                const ctmc::StationaryDistribution& pi,
                                double lambda_n0, int n0) {
  if (!(lambda_n0 > 0.0))
    fail(Errc::domain_violation, "eigenvalue of the first active mode must be positive");
  CriterionReport r;
  r.pi = pi.pi;
  r.bound = -lambda_n0 + ergodic_drift_sum(params, pi.pi);
  r.exact = true;
  r.verdict = verdict_of(r.bound);
  r.formula = Formula::thm44;
  r.note = "per-path exponent for deterministic initial data, first active mode " +
           std::to_string(n0);
  return r;
}

QRange example45_q_range(double alpha_bar1, double alpha_bar2, double mu1,
                         double mu2, double nu) {
  if (!(nu > 0.0)) fail(Errc::domain_violation, "nu must be positive");
  const double first = alpha_bar1 + mu1;
  const double second = alpha_bar2 + mu2;
  if (!(first > 1.0))
    fail(Errc::hypothesis_violated,
         "first condition fails: alpha_bar_1 + mu_1 = " + std::to_string(first) +
             " is not > 1");
  if (!(second < 1.0))
    fail(Errc::hypothesis_violated,
         "second condition fails: alpha_bar_2 + mu_2 = " + std::to_string(second) +
             " is not < 1");
  return {0.0, nu * (1.0 - second) / (first - 1.0)};
}

OptimizeResult optimize_sigma(
    const std::function<RegimeCriterionTerms(const SigmaWeights&)>& build,
    const ctmc::StationaryDistribution& pi, double p, Formula tag) {
  const int m = static_cast<int>(pi.pi.size());
  auto objective = [&](const std::vector<double>& sigma) {
    return certified_decay(build(SigmaWeights::of(sigma)), pi.pi);
  };

  std::vector<double> uniform(static_cast<std::size_t>(m), 1.0);
  const double base = objective(uniform);

  auto finish = [&](SigmaWeights sig, bool improved, const char* note) {
    auto report = theorem31_bound(build(sig), pi, p, tag, &sig);
    if (note) report.note = note;
    return OptimizeResult{std::move(sig), std::move(report), improved};
  };

  if (m < 2)
    return finish(SigmaWeights::uniform(std::max(m, 1)), false,
                  "single regime: weights play no role");

  const double zlo = std::log(kSigmaLo), zhi = std::log(kSigmaHi);
  std::vector<double> z(static_cast<std::size_t>(m), 0.0);  // log sigma
  auto eval_at = [&](std::vector<double> logs) {
    std::vector<double> sig(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) sig[i] = std::exp(logs[i]);
    return objective(sig);
  };

  for (int sweep = 0; sweep < 4; ++sweep) {
    // Final sweep refines with a half-width bracket around the current point.
    for (int i = 0; i < m; ++i) {
      double lo = zlo, hi = zhi;
      if (sweep == 3) {
        const double half = 0.25 * (zhi - zlo);
        lo = std::max(zlo, z[static_cast<std::size_t>(i)] - half);
        hi = std::min(zhi, z[static_cast<std::size_t>(i)] + half);
      }
      auto line = [&](double zi) {
        std::vector<double> trial = z;
        trial[static_cast<std::size_t>(i)] = zi;
        return eval_at(trial);
      };
      z[static_cast<std::size_t>(i)] = golden_max(line, lo, hi);
    }
  }

  std::vector<double> best(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    best[static_cast<std::size_t>(i)] = std::exp(z[static_cast<std::size_t>(i)]);
  const double gain = objective(best) - base;

  if (!(gain > 1e-12 * std::max(1.0, std::fabs(base))))
    return finish(SigmaWeights::uniform(m), false,
                  "objective is flat in the weights; uniform returned");

  return finish(SigmaWeights::of(best), true, nullptr);
}

}  // namespace spdesim::criteria
