#pragma once

#include <span>
#include <vector>

#include "spdesim/errors.hpp"

namespace spdesim::spectral {

// Eigenbasis of the negative Dirichlet Laplacian on an interval (0, L):
// lambda_n = (n pi / L)^2 with e_n(x) = sqrt(2/L) sin(n pi x / L), or a
// user-supplied increasing eigenvalue list with abstract eigenfunctions.
// Mode numbers are 1-based throughout the public API (lambda_1 is the
// ground mode), matching the usual series notation; bulk access via
// eigenvalues() is a plain 0-based span.
class SpectralBasis {
public:
  enum class Kind { dirichlet_interval, user_supplied };

  static SpectralBasis dirichlet(int mode_count, double length);
  static SpectralBasis user_supplied(std::vector<double> eigenvalues);

  Kind kind() const { return kind_; }
  int mode_count() const { return static_cast<int>(eigenvalues_.size()); }
  double length() const { return length_; }

  double eigenvalue(int mode) const;  // mode in 1..mode_count
  std::span<const double> eigenvalues() const { return eigenvalues_; }

  // e_mode(x); defined only for the interval basis.
  double eigenfunction(int mode, double x) const;

private:
  SpectralBasis() = default;
  Kind kind_ = Kind::dirichlet_interval;
  double length_ = 0.0;
  std::vector<double> eigenvalues_;
};

// Coefficients of a field in the basis: coefficients[k] multiplies mode k+1.
struct ModeVector {
  std::vector<double> coefficients;
  int size() const { return static_cast<int>(coefficients.size()); }
};

// Values on the uniform interior grid x_j = j L/(M+1), j = 1..M; the
// Dirichlet endpoints are implicitly zero and not stored.
struct GridField {
  std::vector<double> values;
  int size() const { return static_cast<int>(values.size()); }
};

// sqrt of the coefficient sum of squares (Parseval).
double h_norm(const ModeVector& v);

// Smallest 1-based mode number with |coefficient| > tol. A negative tol
// selects the default screen 1e-12 * h_norm(v).
int first_nonzero_index(const ModeVector& v, double tol = -1.0);

// Initial-data constructors; all reject identically-zero data, for which
// the per-path exponent is undefined.
ModeVector mode_initial(int mode, double amplitude, int mode_count);
ModeVector coefficients_initial(std::vector<double> coefficients);
ModeVector grid_initial(const GridField& field, const SpectralBasis& basis);

// Dense sine synthesis/analysis between modes and an M-point interior grid,
// with the eigenfunction samples precomputed once. Analysis uses the
// composite trapezoid rule, which is exact on the first M modes by discrete
// sine orthogonality, so analyze(synthesize(v)) == v whenever M >= N.
class SineTransform {
public:
  SineTransform(const SpectralBasis& basis, int grid_points);

  int grid_points() const { return grid_points_; }
  double grid_point(int j) const;  // x_{j+1} for 0-based j

  GridField synthesize(const ModeVector& v) const;
  ModeVector analyze(const GridField& f) const;

private:
  int modes_ = 0;
  int grid_points_ = 0;
  double length_ = 0.0;
  std::vector<double> samples_;  // [mode][grid], e_{mode+1}(x_j)
};

GridField to_grid(const ModeVector& v, const SpectralBasis& basis, int grid_points);
ModeVector from_grid(const GridField& f, const SpectralBasis& basis);

}  // namespace spdesim::spectral
