#include "spdesim/spectral.hpp"

#include <cmath>
#include <string>

namespace spdesim::spectral {

SpectralBasis SpectralBasis::dirichlet(int mode_count, double length) {
  if (mode_count < 1)
    fail(Errc::domain_violation, "basis needs at least one mode");
  if (!(length > 0.0))
    fail(Errc::domain_violation, "domain length must be positive");
  SpectralBasis b;
  b.kind_ = Kind::dirichlet_interval;
  b.length_ = length;
  b.eigenvalues_.resize(static_cast<std::size_t>(mode_count));
  for (int n = 1; n <= mode_count; ++n) {
    const double k = n * M_PI / length;
    b.eigenvalues_[static_cast<std::size_t>(n - 1)] = k * k;
  }
  return b;
}

SpectralBasis SpectralBasis::user_supplied(std::vector<double> eigenvalues) {
  if (eigenvalues.empty())
    fail(Errc::domain_violation, "basis needs at least one mode");
  double prev = 0.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (!(eigenvalues[k] > prev) || !std::isfinite(eigenvalues[k]))
      fail(Errc::domain_violation,
           "eigenvalues must be positive and strictly increasing; entry " +
               std::to_string(k + 1) + " is " + std::to_string(eigenvalues[k]));
    prev = eigenvalues[k];
  }
  SpectralBasis b;
  b.kind_ = Kind::user_supplied;
  b.length_ = 0.0;
  b.eigenvalues_ = std::move(eigenvalues);
  return b;
}

double SpectralBasis::eigenvalue(int mode) const {
  if (mode < 1 || mode > mode_count())
    fail(Errc::domain_violation, "mode " + std::to_string(mode) +
                                     " outside 1.." + std::to_string(mode_count()));
  return eigenvalues_[static_cast<std::size_t>(mode - 1)];
}

double SpectralBasis::eigenfunction(int mode, double x) const {
  if (kind_ != Kind::dirichlet_interval)
    fail(Errc::domain_violation,
         "a user-supplied basis has no concrete eigenfunctions");
  if (mode < 1 || mode > mode_count())
    fail(Errc::domain_violation, "mode " + std::to_string(mode) +
                                     " outside 1.." + std::to_string(mode_count()));
  return std::sqrt(2.0 / length_) * std::sin(mode * M_PI * x / length_);
}

double h_norm(const ModeVector& v) {
  double ss = 0.0;
  for (double c : v.coefficients) ss += c * c;
  return std::sqrt(ss);
}

int first_nonzero_index(const ModeVector& v, double tol) {
  if (tol < 0.0) tol = 1e-12 * h_norm(v);
  for (int k = 0; k < v.size(); ++k)
    if (std::fabs(v.coefficients[static_cast<std::size_t>(k)]) > tol) return k + 1;
  fail(Errc::all_zero, "all mode coefficients are within " + std::to_string(tol) +
                           " of zero");
}

ModeVector mode_initial(int mode, double amplitude, int mode_count) {
  if (mode < 1 || mode > mode_count)
    fail(Errc::domain_violation, "initial mode " + std::to_string(mode) +
                                     " outside 1.." + std::to_string(mode_count));
  if (amplitude == 0.0)
    fail(Errc::all_zero, "initial data is identically zero");
  ModeVector v;
  v.coefficients.assign(static_cast<std::size_t>(mode_count), 0.0);
  v.coefficients[static_cast<std::size_t>(mode - 1)] = amplitude;
  return v;
}

ModeVector coefficients_initial(std::vector<double> coefficients) {
  if (coefficients.empty())
    fail(Errc::domain_violation, "initial data needs at least one coefficient");
  ModeVector v{std::move(coefficients)};
  if (h_norm(v) == 0.0) fail(Errc::all_zero, "initial data is identically zero");
  return v;
}

ModeVector grid_initial(const GridField& field, const SpectralBasis& basis) {
  ModeVector v = from_grid(field, basis);
  if (h_norm(v) == 0.0) fail(Errc::all_zero, "initial data is identically zero");
  return v;
}

SineTransform::SineTransform(const SpectralBasis& basis, int grid_points)
    : modes_(basis.mode_count()),
      grid_points_(grid_points),
      length_(basis.length()) {
  if (basis.kind() != SpectralBasis::Kind::dirichlet_interval)
    fail(Errc::domain_violation,
         "grid transforms need the interval basis (concrete eigenfunctions)");
  if (grid_points < modes_)
    fail(Errc::under_resolved, "grid of " + std::to_string(grid_points) +
                                   " points cannot resolve " +
                                   std::to_string(modes_) + " modes");
  samples_.resize(static_cast<std::size_t>(modes_) *
                  static_cast<std::size_t>(grid_points_));
  for (int n = 1; n <= modes_; ++n)
    for (int j = 0; j < grid_points_; ++j)
      samples_[static_cast<std::size_t>(n - 1) * grid_points_ + j] =
          basis.eigenfunction(n, grid_point(j));
}

double SineTransform::grid_point(int j) const {
  return (j + 1) * length_ / (grid_points_ + 1);
}

GridField SineTransform::synthesize(const ModeVector& v) const {
  if (v.size() != modes_)
    fail(Errc::domain_violation, "coefficient count " + std::to_string(v.size()) +
                                     " does not match basis of " +
                                     std::to_string(modes_) + " modes");
  GridField f;
  f.values.assign(static_cast<std::size_t>(grid_points_), 0.0);
  for (int n = 0; n < modes_; ++n) {
    const double c = v.coefficients[static_cast<std::size_t>(n)];
    if (c == 0.0) continue;
    const double* row = samples_.data() + static_cast<std::size_t>(n) * grid_points_;
    for (int j = 0; j < grid_points_; ++j) f.values[static_cast<std::size_t>(j)] += c * row[j];
  }
  return f;
}

ModeVector SineTransform::analyze(const GridField& f) const {
  if (f.size() != grid_points_)
    fail(Errc::domain_violation, "grid of " + std::to_string(f.size()) +
                                     " values does not match transform of " +
                                     std::to_string(grid_points_) + " points");
  // Trapezoid rule with zero endpoints: h * sum_j f_j e_n(x_j).
  const double h = length_ / (grid_points_ + 1);
  ModeVector v;
  v.coefficients.assign(static_cast<std::size_t>(modes_), 0.0);
  for (int n = 0; n < modes_; ++n) {
    const double* row = samples_.data() + static_cast<std::size_t>(n) * grid_points_;
    double dot = 0.0;
    for (int j = 0; j < grid_points_; ++j) dot += f.values[static_cast<std::size_t>(j)] * row[j];
    v.coefficients[static_cast<std::size_t>(n)] = h * dot;
  }
  return v;
}

GridField to_grid(const ModeVector& v, const SpectralBasis& basis, int grid_points) {
  return SineTransform(basis, grid_points).synthesize(v);
}

ModeVector from_grid(const GridField& f, const SpectralBasis& basis) {
  return SineTransform(basis, f.size()).analyze(f);
}

}  // namespace spdesim::spectral
