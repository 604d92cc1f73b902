#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "spdesim/ctmc.hpp"

using namespace spdesim;
using ctmc::GeneratorMatrix;
using ctmc::SwitchingPath;

namespace {

GeneratorMatrix two_state(double nu, double q) {
  return GeneratorMatrix::validate({{-nu, nu}, {q, -q}});
}

Errc validation_code(const std::vector<std::vector<double>>& raw) {
  try {
    (void)GeneratorMatrix::validate(raw);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected validation to throw");
  return Errc::non_square;
}

}  // namespace

TEST_CASE("generator validation") {
  auto g = GeneratorMatrix::validate({{-1, 1}, {2, -2}});
  CHECK(g.size() == 2);
  CHECK(g.rate(0, 1) == 1.0);
  CHECK(g.rate(1, 0) == 2.0);
  CHECK(g.exit_rate(0) == 1.0);

  // The diagonal is recomputed, not trusted.
  auto fixed = GeneratorMatrix::validate({{-5, 1}, {2, -7}});
  CHECK(fixed.rate(0, 0) == -1.0);
  CHECK(fixed.rate(1, 1) == -2.0);
  for (int i = 0; i < 2; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < 2; ++j) row_sum += fixed.rate(i, j);
    CHECK(std::fabs(row_sum) <= 1e-12);
  }

  CHECK(validation_code({{-1, 1}, {0, 0}}) == Errc::reducible);
  CHECK(validation_code({{-1, 1}, {-0.5, 0.5}}) == Errc::negative_off_diagonal);
  CHECK(validation_code({{-1, 1}}) == Errc::non_square);
  CHECK(validation_code({{-1, 1, 0}, {1, -1, 0}, {0, 0, 0}}) == Errc::reducible);
  CHECK(validation_code({}) == Errc::non_square);

  // One-state chain is fine and has no dynamics.
  auto solo = GeneratorMatrix::validate({{7.0}});
  CHECK(solo.size() == 1);
  CHECK(solo.rate(0, 0) == 0.0);
}

TEST_CASE("stationary distribution") {
  // pi = (q/(nu+q), nu/(nu+q)) for the two-state chain; solve vs formula.
  for (auto [nu, q] : {std::pair{1.0, 2.0}, {1.0, 0.5}, {3.0, 0.25}, {0.1, 7.0}}) {
    auto pi = ctmc::stationary_distribution(two_state(nu, q)).pi;
    CHECK(pi[0] == doctest::Approx(q / (nu + q)).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(nu / (nu + q)).epsilon(1e-12));
  }

  auto sym = ctmc::stationary_distribution(two_state(1.0, 1.0)).pi;
  CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(sym[1] == doctest::Approx(0.5).epsilon(1e-13));

  auto skew = ctmc::stationary_distribution(two_state(1.0, 0.5)).pi;
  CHECK(skew[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(skew[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Random dense generators: pi G = 0, pi > 0, sum pi = 1.
  auto s = rng::make_stream(42, 0, rng::Role::generic);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + static_cast<int>(s.raw() % 5);
    std::vector<std::vector<double>> raw(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j) raw[i][j] = s.uniform(0.05, 3.0);
    auto g = GeneratorMatrix::validate(raw);
    auto pi = ctmc::stationary_distribution(g).pi;

    double total = 0.0;
    for (double p : pi) {
      CHECK(p > 0.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 0; j < m; ++j) {
      double dot = 0.0;
      for (int i = 0; i < m; ++i) dot += pi[i] * g.rate(i, j);
      CHECK(std::fabs(dot) <= 1e-10);
    }
  }
}

TEST_CASE("numerically reducible generator is rejected by the solve") {
  // Two 2-state blocks bridged by rates far below working precision: the
  // graph is connected, but the matrix rank collapses below m-1.
  std::vector<std::vector<double>> raw = {
      {0, 1, 1e-300, 0},
      {1, 0, 0, 0},
      {0, 0, 0, 1},
      {1e-300, 0, 1, 0},
  };
  auto g = GeneratorMatrix::validate(raw);  // passes the graph check
  CHECK_THROWS_AS(ctmc::stationary_distribution(g), Error);
  try {
    ctmc::stationary_distribution(g);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::singular_beyond_rank_one);
  }
}

TEST_CASE("switching path sampling") {
  auto g = two_state(1.0, 2.0);

  SUBCASE("determinism") {
    auto s1 = rng::make_stream(7, 3, rng::Role::chain);
    auto s2 = rng::make_stream(7, 3, rng::Role::chain);
    auto p1 = ctmc::sample_switching_path(g, 0, 50.0, s1);
    auto p2 = ctmc::sample_switching_path(g, 0, 50.0, s2);
    REQUIRE(p1.events.size() == p2.events.size());
    CHECK(p1.events == p2.events);
    CHECK(!p1.events.empty());
  }

  SUBCASE("one-state chain never moves") {
    auto solo = GeneratorMatrix::validate({{0.0}});
    auto s = rng::make_stream(7, 0, rng::Role::chain);
    auto p = ctmc::sample_switching_path(solo, 0, 100.0, s);
    CHECK(p.events.empty());
    CHECK(p.state_at(50.0) == 0);
  }

  SUBCASE("structure: alternating states, increasing times") {
    auto s = rng::make_stream(11, 0, rng::Role::chain);
    auto p = ctmc::sample_switching_path(g, 1, 200.0, s);
    int prev_state = 1;
    double prev_time = 0.0;
    for (const auto& e : p.events) {
      CHECK(e.time > prev_time);
      CHECK(e.time < 200.0);
      CHECK(e.state != prev_state);
      prev_time = e.time;
      prev_state = e.state;
    }
  }

  SUBCASE("right continuity at event times") {
    auto s = rng::make_stream(13, 0, rng::Role::chain);
    auto p = ctmc::sample_switching_path(g, 0, 50.0, s);
    REQUIRE(p.events.size() >= 2);
    const auto& e = p.events[1];
    CHECK(p.state_at(e.time) == e.state);
    CHECK(p.state_at(std::nextafter(e.time, 0.0)) == p.events[0].state);
    CHECK(p.state_at(0.0) == 0);
  }

  SUBCASE("long-run event rate matches stationary switching flow") {
    // pi = (2/3, 1/3); events occur at long-run rate pi0*nu + pi1*q = 4/3.
    auto s = rng::make_stream(17, 0, rng::Role::chain);
    const double T = 30000.0;
    auto p = ctmc::sample_switching_path(g, 0, T, s);
    const double rate = static_cast<double>(p.events.size()) / T;
    CHECK(rate == doctest::Approx(4.0 / 3.0).epsilon(0.03));
  }

  SUBCASE("holding time means") {
    auto s = rng::make_stream(19, 0, rng::Role::chain);
    const double T = 100000.0;
    auto p = ctmc::sample_switching_path(g, 0, T, s);
    std::vector<double> sum(2, 0.0);
    std::vector<int> count(2, 0);
    int state = 0;
    double entered = 0.0;
    for (const auto& e : p.events) {  // censored final sojourn dropped
      sum[state] += e.time - entered;
      count[state] += 1;
      entered = e.time;
      state = e.state;
    }
    REQUIRE(count[0] >= 10000);
    REQUIRE(count[1] >= 10000);
    CHECK(sum[0] / count[0] == doctest::Approx(1.0).epsilon(0.02));   // Exp(1)
    CHECK(sum[1] / count[1] == doctest::Approx(0.5).epsilon(0.02));   // Exp(2)
  }
}

TEST_CASE("occupation fractions") {
  SUBCASE("exact small cases") {
    SwitchingPath still{2, 0, 10.0, {}};
    auto f = ctmc::occupation_fractions(still);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 0.0);

    SwitchingPath half{2, 0, 2.0, {{1.0, 1}}};
    auto h = ctmc::occupation_fractions(half);
    CHECK(h[0] == 0.5);
    CHECK(h[1] == 0.5);
  }

  SUBCASE("entries sum to exactly one") {
    auto g3 = GeneratorMatrix::validate(
        {{0, 0.7, 0.3}, {1.1, 0, 0.4}, {0.25, 0.6, 0}});
    for (int seed = 0; seed < 100; ++seed) {
      auto s = rng::make_stream(23, seed, rng::Role::chain);
      auto p = ctmc::sample_switching_path(g3, seed % 3, 37.5, s);
      auto f = ctmc::occupation_fractions(p);
      CHECK(std::accumulate(f.begin(), f.end(), 0.0) == 1.0);
      for (double x : f) CHECK(x >= 0.0);
    }
  }

  SUBCASE("long-horizon fractions approach the stationary law") {
    auto g = two_state(1.0, 2.0);
    auto pi = ctmc::stationary_distribution(g).pi;
    int hits = 0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
      auto s = rng::make_stream(29, seed, rng::Role::chain);
      auto p = ctmc::sample_switching_path(g, 0, 10000.0, s);
      auto f = ctmc::occupation_fractions(p);
      if (std::fabs(f[0] - pi[0]) < 0.02 && std::fabs(f[1] - pi[1]) < 0.02) ++hits;
    }
    CHECK(hits >= 19);
  }
}
