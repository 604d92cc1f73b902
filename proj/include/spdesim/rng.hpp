#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "spdesim/errors.hpp"

namespace spdesim::rng {

// Role of a sub-stream within one simulated path. Chain, jump and Wiener
// randomness are independent, so each role gets its own generator derived
// from (master_seed, path_id, role).
enum class Role : std::uint64_t {
  chain = 1,
  jumps = 2,
  wiener = 3,
  wiener_refine = 4,
  generic = 5,
};

namespace detail {

// splitmix64; used only to spread (seed, path, role) into generator seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic random stream. All sampling is by explicit inversion or
// Box-Muller on top of mt19937_64, so sequences are identical across
// platforms and standard-library implementations for a given seed.
class Stream {
public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform on the open interval (0,1); never returns an exact endpoint.
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Index sampled with probability weights[i] / sum(weights).
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Sub-stream derivation; `extra` distinguishes repeated uses of one role
// (e.g. successive refinement levels).
inline Stream make_stream(std::uint64_t master_seed, std::uint64_t path_id,
                          Role role, std::uint64_t extra = 0) {
  using detail::mix64;
  std::uint64_t h = mix64(master_seed ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ path_id);
  h = mix64(h ^ static_cast<std::uint64_t>(role));
  h = mix64(h ^ extra);
  return Stream(h);
}

}  // namespace spdesim::rng
