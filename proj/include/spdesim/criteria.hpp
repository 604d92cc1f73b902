#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdesim/ctmc.hpp"
#include "spdesim/errors.hpp"
#include "spdesim/jumps.hpp"
#include "spdesim/verdict.hpp"

namespace spdesim::criteria {

// Per-regime weights of the quadratic Lyapunov family U(x,i) = sigma_i |x|^2.
// Only ratios sigma_j/sigma_i ever enter a formula, so weights are stored
// normalized with min sigma_i = 1.
class SigmaWeights {
public:
  static SigmaWeights uniform(int regimes);
  static SigmaWeights of(std::vector<double> sigma);

  int size() const { return static_cast<int>(sigma_.size()); }
  double operator[](int i) const { return sigma_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return sigma_; }

private:
  SigmaWeights() = default;
  std::vector<double> sigma_;
};

// The four per-regime constants of the drift-domination conditions, as
// evaluated on the quadratic family:
//   alpha_i bounds the generator action, beta_i the squared diffusion from
//   below, delta_i the jump dissipation, rho_i the switching log-penalty.
struct RegimeCriterionTerms {
  std::vector<double> alpha, beta, delta, rho;
  int regimes() const { return static_cast<int>(alpha.size()); }
};

using spdesim::Verdict;
using spdesim::verdict_name;
enum class Formula { thm31, thm41, thm44, ex33, ex45 };

const char* formula_name(Formula f);

struct CriterionReport {
  std::optional<RegimeCriterionTerms> terms;
  std::vector<double> pi;
  std::vector<double> sigma;  // empty when weights play no role
  double p = 2.0;
  double bound = 0.0;  // certified limsup of (1/t) ln |X(t)|
  bool exact = false;  // true when the value is an equality, not an upper bound
  Verdict verdict = Verdict::inconclusive;
  Formula formula = Formula::thm31;
  std::string note;
};

// Inputs of the diagonal (mode-wise linear) class: dX drift alpha_bar_i A-part
// with leading eigenvalue lambda1, scalar noise level beta_bar_i, and the
// per-regime jump moments (empty means no jumps).
struct LinearParams {
  double lambda1 = 0.0;
  std::vector<double> alpha_bar;
  std::vector<double> beta_bar;
  std::vector<jumps::JumpMoments> moments;  // empty or one per regime
};

// Inputs of the dissipative semilinear class: 2xf(x,i) + g(x,i)^2 <= b_i x^2
// and x g(x,i) >= sqrt(d_i) x^2 with d_i > 0; nu is the lower bound on the
// diffusion operator's coefficient.
struct SemilinearParams {
  double nu = 0.0;
  std::vector<double> b;
  std::vector<double> d;
  std::vector<jumps::JumpMoments> moments;
};

RegimeCriterionTerms linear_terms(const LinearParams& params,
                                  const ctmc::GeneratorMatrix& g,
                                  const SigmaWeights& sigma);

RegimeCriterionTerms semilinear_terms(const SemilinearParams& params,
                                      const ctmc::GeneratorMatrix& g,
                                      const SigmaWeights& sigma);

// bound = -(1/p) sum_i pi_i (beta_i/2 + delta_i - alpha_i - rho_i).
CriterionReport theorem31_bound(const RegimeCriterionTerms& terms,
                                const ctmc::StationaryDistribution& pi,
                                double p = 2.0, Formula tag = Formula::thm31,
                                const SigmaWeights* sigma = nullptr);

// bound = -lambda1 + sum_j pi_j (alpha_bar_j - beta_bar_j^2/2 + mu_j).
CriterionReport theorem41_bound(const LinearParams& params,
                                const ctmc::StationaryDistribution& pi);

// Exact per-path exponent for deterministic initial data whose first active
// mode is n0 with eigenvalue lambda_n0; same ergodic sum as theorem41_bound.
CriterionReport theorem44_exact(const LinearParams& params,
                                const ctmc::StationaryDistribution& pi,
                                double lambda_n0, int n0);

// Open interval of switching rates q certified stable for the two-regime
// interval model with lambda1 = 1 and generator [[-nu, nu], [q, -q]].
struct QRange {
  double lo = 0.0;
  double hi = 0.0;
};
QRange example45_q_range(double alpha_bar1, double alpha_bar2, double mu1,
                         double mu2, double nu);

// Derivative-free maximization of the certified decay over log-sigma by
// per-coordinate golden-section sweeps within sigma_i in [1e-3, 1e3].
struct OptimizeResult {
  SigmaWeights sigma;
  CriterionReport report;
  bool improved = false;  // false when the objective is flat (uniform returned)
};

OptimizeResult optimize_sigma(
    const std::function<RegimeCriterionTerms(const SigmaWeights&)>& build,
    const ctmc::StationaryDistribution& pi, double p = 2.0,
    Formula tag = Formula::thm31);

}  // namespace spdesim::criteria
