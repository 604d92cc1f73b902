#pragma once

#include <stdexcept>
#include <string>

namespace spdesim {

// Every failure the library reports deliberately carries one of these codes.
// Codes map to CLI exit classes: schema/usage -> 2, hypothesis -> 3, numeric -> 4.
enum class Errc {
  // generators / chains
  non_square,
  negative_off_diagonal,
  reducible,
  singular_beyond_rank_one,
  // jump measures / profiles
  quadrature_failure,
  domain_violation,
  gamma_out_of_range,
  moment_divergence,
  // spectral data
  all_zero,
  under_resolved,
  // estimation
  window_too_short,
  too_few_paths,
  // criteria
  nonpositive_d,
  hypothesis_violated,
  not_linear,
  // expression language
  syntax_error,
  unknown_identifier,
  unknown_function,
  eval_domain,
  depth_exceeded,
  // scenario files / CLI
  schema,
  bad_param_path,
  // runtime
  overflow,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace spdesim
