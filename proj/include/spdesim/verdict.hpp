#pragma once

namespace spdesim {

// Shared by the analytic criteria and the Monte Carlo estimators: the sign of
// a bound or confidence interval decides, anything straddling zero does not.
enum class Verdict { stable, unstable, inconclusive };

constexpr const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace spdesim
