#pragma once

#include <span>
#include <vector>

#include "spdesim/errors.hpp"
#include "spdesim/rng.hpp"

namespace spdesim::ctmc {

// Validated transition-rate matrix of a finite, irreducible continuous-time
// Markov chain. States are 0-based here; file formats use 1-based labels and
// convert at the boundary. The diagonal is always recomputed as the negative
// off-diagonal row sum, so rows sum to zero by construction.
class GeneratorMatrix {
public:
  static GeneratorMatrix validate(const std::vector<std::vector<double>>& raw);

  int size() const { return m_; }
  double rate(int i, int j) const {
    return rates_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) +
                  static_cast<std::size_t>(j)];
  }
  // Total rate of leaving state i (= -rate(i,i)).
  double exit_rate(int i) const { return -rate(i, i); }
  std::span<const double> data() const { return rates_; }

private:
  GeneratorMatrix() = default;
  int m_ = 0;
  std::vector<double> rates_;  // row-major
};

struct StationaryDistribution {
  std::vector<double> pi;  // strictly positive, sums to 1
};

// Null-space solve of pi * G = 0 with sum(pi) = 1. Rejects matrices whose
// numerical rank is not exactly m-1 (a fingerprint of near-reducibility).
StationaryDistribution stationary_distribution(const GeneratorMatrix& g);

// One realized chain trajectory on [0, horizon]. Right-continuous step
// function: at an event time the chain is already in the new state.
struct SwitchingPath {
  struct Event {
    double time;  // strictly increasing, in (0, horizon)
    int state;    // differs from the previous state
    bool operator==(const Event&) const = default;
  };

  int state_count = 0;
  int initial_state = 0;
  double horizon = 0.0;
  std::vector<Event> events;

  int state_at(double t) const;
};

// Holding time in state i is Exponential(exit_rate(i)); the successor is
// drawn with probability rate(i,j)/exit_rate(i). Consumes only `stream`.
SwitchingPath sample_switching_path(const GeneratorMatrix& g, int r0, double T,
                                    rng::Stream& stream);

// Fraction of [0, horizon] spent in each state; entries sum to 1 exactly.
std::vector<double> occupation_fractions(const SwitchingPath& path);

}  // namespace spdesim::ctmc
