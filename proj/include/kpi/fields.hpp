#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "kpi/grid.hpp"

namespace kpi {

using Complex = std::complex<double>;

/// Real samples u(x_i, y_j), stored x-major: values[i * ny + j].
class RealField2D {
 public:
  explicit RealField2D(Grid grid);
  RealField2D(Grid grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_.ny() + j]; }

  double max_abs() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Fourier coefficients of a real field on a periodic box.
///
/// Normalisation: u(x,y) = (lx ly)^{-1/2} sum_{n,m} c(n,m) e^{i(xi x + mu y)}, so
/// the integral of |u|^2 over the box equals sum |c|^2 exactly.
/// Storage is centred: index (n + nx/2) * ny + (m + ny/2).
class SpectralField2D {
 public:
  explicit SpectralField2D(Grid grid);
  SpectralField2D(Grid grid, std::vector<Complex> coeff);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const Complex> coeff() const noexcept { return coeff_; }

  Complex operator()(int n, int m) const { return coeff_[index(n, m)]; }
  std::size_t index(int n, int m) const noexcept {
    return static_cast<std::size_t>(n - grid_.min_x_mode()) * grid_.ny() +
           static_cast<std::size_t>(m - grid_.min_y_mode());
  }

  /// sqrt(sum |c|^2), which equals the physical L2 norm.
  double l2_norm() const noexcept;

  /// Largest |c(0, m)|.
  double zero_fiber_residue() const noexcept;
  /// Largest |c(-n,-m) - conj(c(n,m))| over non-Nyquist modes.
  double hermitian_residue() const noexcept;
  /// Largest modulus on a Nyquist row or column.
  double nyquist_residue() const noexcept;

  bool satisfies_kp_constraint(double tol = 1e-12) const noexcept;

 private:
  Grid grid_;
  std::vector<Complex> coeff_;
};

SpectralField2D operator+(const SpectralField2D& a, const SpectralField2D& b);
SpectralField2D operator-(const SpectralField2D& a, const SpectralField2D& b);
SpectralField2D operator*(double s, const SpectralField2D& a);

/// Zeroes the xi = 0 fiber and the Nyquist row/column.
SpectralField2D enforce_kp_constraint(const SpectralField2D& f);

}  // namespace kpi
