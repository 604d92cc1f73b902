#include "spdesim/jumps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace spdesim::jumps {

namespace {

constexpr int kQuadBudget = 1 << 15;
constexpr double kQuadRelTol = 1e-8;
constexpr int kCdfCells = 4096;
constexpr int kProbeCount = 1024;

struct GaussRule {
  std::array<double, 15> x;  // nodes on (-1, 1)
  std::array<double, 15> w;
};

// Nodes and weights of the 15-point Gauss-Legendre rule, found by Newton
// iteration on the Legendre polynomial so no long decimal tables are needed.
const GaussRule& gauss15() {
  static const GaussRule rule = [] {
    GaussRule r{};
    constexpr int n = 15;
    for (int k = 0; k < n; ++k) {
      double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 64; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) <= 1e-16 * (1.0 + std::fabs(x))) break;
      }
      r.x[k] = x;
      r.w[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

template <class F>
double gauss15_on(const F& g, double a, double b, int& evals) {
  const auto& r = gauss15();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 15; ++k) s += r.w[k] * g(c + h * r.x[k]);
  evals += 15;
  return s * h;
}

// Adaptive bisection with the 15-point rule. The acceptance threshold for a
// subinterval is the global tolerance prorated by interval length, so the
// accumulated error stays within rel_tol of the whole integral's scale.
template <class F>
double adaptive_gauss(const F& g, double a, double b) {
  int evals = 0;
  const double whole = gauss15_on(g, a, b, evals);
  const double scale = std::max(std::fabs(whole), 1e-12);
  const double span = b - a;

  struct Seg {
    double a, b, coarse;
  };
  std::vector<Seg> work{{a, b, whole}};
  double total = 0.0;
  while (!work.empty()) {
    const Seg s = work.back();
    work.pop_back();
    if (evals + 30 > kQuadBudget)
      fail(Errc::quadrature_failure,
           "quadrature did not reach relative tolerance " +
               std::to_string(kQuadRelTol) + " within " +
               std::to_string(kQuadBudget) + " nodes");
    const double mid = 0.5 * (s.a + s.b);
    const double left = gauss15_on(g, s.a, mid, evals);
    const double right = gauss15_on(g, mid, s.b, evals);
    const double fine = left + right;
    const double width = s.b - s.a;
    if (std::fabs(fine - s.coarse) <= kQuadRelTol * scale * (width / span)) {
      total += fine;
    } else if (width <= 1e-14 * span) {
      // Bisection has hit floating-point resolution without converging;
      // the integrand is effectively singular here.
      fail(Errc::quadrature_failure,
           "integrand not resolvable near " + std::to_string(mid) +
               " (possible divergence)");
    } else {
      work.push_back({s.a, mid, left});
      work.push_back({mid, s.b, right});
    }
  }
  return total;
}

[[noreturn]] void rethrow_as(Errc code, const Error& e) {
  throw Error(code, std::string(e.what()));
}

}  // namespace

JumpMeasure JumpMeasure::atomic(std::vector<double> rates) {
  if (rates.empty())
    fail(Errc::domain_violation, "atomic jump measure needs at least one atom");
  double total = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (!(rates[k] > 0.0) || !std::isfinite(rates[k]))
      fail(Errc::domain_violation, "atom " + std::to_string(k + 1) +
                                       " has nonpositive rate " +
                                       std::to_string(rates[k]));
    total += rates[k];
  }
  JumpMeasure m;
  m.kind_ = Kind::atomic;
  m.atom_rates_ = std::move(rates);
  m.total_rate_ = total;
  return m;
}

JumpMeasure JumpMeasure::parametric(double total_rate, exprlang::Expr density,
                                    double support_lo, double support_hi) {
  if (!(total_rate > 0.0) || !std::isfinite(total_rate))
    fail(Errc::domain_violation,
         "parametric jump measure needs a positive total rate");
  if (!(support_lo >= 0.0) || !(support_hi > support_lo))
    fail(Errc::domain_violation, "mark support must satisfy 0 <= lo < hi");
  if (density.empty())
    fail(Errc::domain_violation, "parametric jump measure needs a mark density");

  JumpMeasure m;
  m.kind_ = Kind::parametric;
  m.total_rate_ = total_rate;
  m.density_ = std::move(density);
  m.lo_ = support_lo;
  m.hi_ = support_hi;

  // Composite per-cell quadrature doubles as the normalization check and the
  // inverse-transform table for mark sampling. Cells are uniform in t, with
  // y = t/(1-t) when the support is unbounded.
  auto y_of_t = [&](double t) {
    return m.unbounded() ? t / (1.0 - t) : m.lo_ + (m.hi_ - m.lo_) * t;
  };
  auto mass_density = [&](double t) {
    const double y = y_of_t(t);
    const double jac =
        m.unbounded() ? 1.0 / ((1.0 - t) * (1.0 - t)) : (m.hi_ - m.lo_);
    return m.density_.eval(y) * jac;
  };

  m.cdf_.assign(kCdfCells + 1, 0.0);
  int evals = 0;
  try {
    for (int j = 0; j < kCdfCells; ++j) {
      const double a = static_cast<double>(j) / kCdfCells;
      const double b = static_cast<double>(j + 1) / kCdfCells;
      const double cell = gauss15_on(mass_density, a, b, evals);
      if (cell < -1e-12)
        fail(Errc::domain_violation,
             "mark density is negative near y = " + std::to_string(y_of_t(a)));
      m.cdf_[static_cast<std::size_t>(j) + 1] =
          m.cdf_[static_cast<std::size_t>(j)] + std::max(cell, 0.0);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::eval_domain) rethrow_as(Errc::domain_violation, e);
    throw;
  }

  const double total = m.cdf_.back();
  if (std::fabs(total - 1.0) > 1e-8)
    fail(Errc::domain_violation, "mark density integrates to " +
                                     std::to_string(total) +
                                     ", expected 1 within 1e-8");
  for (double& c : m.cdf_) c /= total;
  m.cdf_.back() = 1.0;
  return m;
}

double JumpMeasure::sample_mark(rng::Stream& stream) const {
  if (kind_ == Kind::atomic)
    return static_cast<double>(stream.categorical(atom_rates_));
  const double u = stream.uniform01();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t cell = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double mass = cdf_[cell + 1] - cdf_[cell];
  const double frac = mass > 0.0 ? (u - cdf_[cell]) / mass : 0.5;
  const double t = (static_cast<double>(cell) + frac) / kCdfCells;
  return unbounded() ? t / (1.0 - t) : lo_ + (hi_ - lo_) * t;
}

std::vector<double> JumpMeasure::probe_marks() const {
  std::vector<double> marks;
  if (kind_ == Kind::atomic) {
    marks.resize(atom_rates_.size());
    for (std::size_t k = 0; k < marks.size(); ++k)
      marks[k] = static_cast<double>(k);
    return marks;
  }
  marks.resize(kProbeCount);
  for (int k = 0; k < kProbeCount; ++k) {
    const double t = (k + 0.5) / kProbeCount;
    marks[static_cast<std::size_t>(k)] =
        unbounded() ? t / (1.0 - t) : lo_ + (hi_ - lo_) * t;
  }
  return marks;
}

double integrate_functional(const JumpMeasure& measure,
                            const std::function<double(double)>& f) {
  if (measure.kind() == JumpMeasure::Kind::atomic) {
    double sum = 0.0;
    for (std::size_t k = 0; k < measure.atom_count(); ++k)
      sum += measure.atom_rate(k) * f(static_cast<double>(k));
    return sum;
  }
  try {
    if (measure.unbounded()) {
      auto g = [&](double t) {
        const double y = t / (1.0 - t);
        return f(y) * measure.density().eval(y) / ((1.0 - t) * (1.0 - t));
      };
      return measure.total_rate() * adaptive_gauss(g, 0.0, 1.0);
    }
    auto g = [&](double y) { return f(y) * measure.density().eval(y); };
    return measure.total_rate() *
           adaptive_gauss(g, measure.support_lo(), measure.support_hi());
  } catch (const Error& e) {
    if (e.code() == Errc::eval_domain) rethrow_as(Errc::domain_violation, e);
    throw;
  }
}

GammaProfile GammaProfile::atomic(std::vector<std::vector<double>> per_atom) {
  if (per_atom.empty())
    fail(Errc::domain_violation, "coefficient table needs at least one atom");
  const std::size_t regimes = per_atom.front().size();
  if (regimes == 0)
    fail(Errc::domain_violation, "coefficient table needs at least one regime");
  for (std::size_t k = 0; k < per_atom.size(); ++k) {
    if (per_atom[k].size() != regimes)
      fail(Errc::domain_violation,
           "atom " + std::to_string(k + 1) + " lists " +
               std::to_string(per_atom[k].size()) + " coefficients, expected " +
               std::to_string(regimes));
    for (std::size_t i = 0; i < regimes; ++i)
      if (!(per_atom[k][i] > -1.0) || !std::isfinite(per_atom[k][i]))
        fail(Errc::gamma_out_of_range,
             "jump coefficient " + std::to_string(per_atom[k][i]) + " at atom " +
                 std::to_string(k + 1) + ", regime " + std::to_string(i + 1) +
                 " violates the gamma > -1 hypothesis");
  }
  GammaProfile p;
  p.kind_ = JumpMeasure::Kind::atomic;
  p.regimes_ = static_cast<int>(regimes);
  p.per_atom_ = std::move(per_atom);
  return p;
}

GammaProfile GammaProfile::parametric(std::vector<exprlang::Expr> per_regime,
                                      const JumpMeasure& measure) {
  if (measure.kind() != JumpMeasure::Kind::parametric)
    fail(Errc::domain_violation,
         "expression coefficients require a parametric jump measure");
  if (per_regime.empty())
    fail(Errc::domain_violation, "coefficient list needs at least one regime");
  const auto marks = measure.probe_marks();
  for (std::size_t i = 0; i < per_regime.size(); ++i) {
    for (double y : marks) {
      double g = 0.0;
      try {
        g = per_regime[i].eval(y);
      } catch (const Error& e) {
        if (e.code() == Errc::eval_domain) rethrow_as(Errc::domain_violation, e);
        throw;
      }
      if (!(g > -1.0) || !std::isfinite(g))
        fail(Errc::gamma_out_of_range,
             "jump coefficient for regime " + std::to_string(i + 1) +
                 " evaluates to " + std::to_string(g) + " at y = " +
                 std::to_string(y) + ", violating the gamma > -1 hypothesis");
    }
  }
  GammaProfile p;
  p.kind_ = JumpMeasure::Kind::parametric;
  p.regimes_ = static_cast<int>(per_regime.size());
  p.exprs_ = std::move(per_regime);
  return p;
}

double GammaProfile::value(int regime, double mark) const {
  if (kind_ == JumpMeasure::Kind::atomic) {
    const auto k = static_cast<std::size_t>(std::llround(mark));
    return per_atom_[k][static_cast<std::size_t>(regime)];
  }
  return exprs_[static_cast<std::size_t>(regime)].eval(mark);
}

JumpMoments jump_moments(const JumpMeasure& measure, const GammaProfile& profile,
                         int regime) {
  auto moment = [&](double (*map)(double)) {
    auto integrand = [&, map](double y) {
      const double g = profile.value(regime, y);
      if (!(g > -1.0))
        fail(Errc::gamma_out_of_range,
             "jump coefficient " + std::to_string(g) + " at y = " +
                 std::to_string(y) + " violates the gamma > -1 hypothesis");
      return map(g);
    };
    try {
      return integrate_functional(measure, integrand);
    } catch (const Error& e) {
      if (e.code() == Errc::quadrature_failure)
        rethrow_as(Errc::moment_divergence, e);
      throw;
    }
  };

  JumpMoments m;
  m.gamma_sq = moment([](double g) { return g * g; });
  m.mu = moment([](double g) { return std::log1p(g) - g; });
  m.m_small = moment([](double g) { return 2.0 * (g - std::log1p(g)); });
  m.log_sq = moment([](double g) {
    const double l = std::log1p(g);
    return l * l;
  });
  m.delta = m.gamma_sq + m.m_small;
  return m;
}

JumpTrain sample_jump_train(const JumpMeasure& measure, double T,
                            rng::Stream& stream) {
  if (!(T > 0.0)) fail(Errc::domain_violation, "horizon must be positive");
  JumpTrain train;
  const double rate = measure.total_rate();
  double t = stream.exponential(rate);
  while (t < T) {
    train.events.push_back({t, measure.sample_mark(stream)});
    t += stream.exponential(rate);
  }
  return train;
}

}  // namespace spdesim::jumps
