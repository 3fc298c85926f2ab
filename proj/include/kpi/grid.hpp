#pragma once

#include <cstddef>
#include <vector>

namespace kpi {

/// Periodic box [0, lx) x [0, ly) sampled on nx x ny points.
///
/// Fourier modes are numbered n in [-nx/2, nx/2) and m in [-ny/2, ny/2) with
/// wavenumbers xi = 2 pi n / lx and mu = 2 pi m / ly. The mode n = -nx/2 (and
/// m = -ny/2) is the Nyquist mode.
class Grid {
 public:
  Grid(std::size_t nx, std::size_t ny, double lx, double ly);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double dx() const noexcept { return lx_ / static_cast<double>(nx_); }
  double dy() const noexcept { return ly_ / static_cast<double>(ny_); }

  int min_x_mode() const noexcept { return -static_cast<int>(nx_ / 2); }
  int min_y_mode() const noexcept { return -static_cast<int>(ny_ / 2); }
  int max_x_mode() const noexcept { return static_cast<int>(nx_ / 2) - 1; }
  int max_y_mode() const noexcept { return static_cast<int>(ny_ / 2) - 1; }

  double xi(int n) const noexcept;
  double mu(int m) const noexcept;

  /// Increasing wavenumber lattices.
  std::vector<double> xi_lattice() const;
  std::vector<double> mu_lattice() const;

  bool operator==(const Grid&) const = default;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double lx_;
  double ly_;
};

Grid make_grid(std::size_t nx, std::size_t ny, double lx, double ly);

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace kpi
