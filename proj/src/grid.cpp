#include "kpi/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kpi/error.hpp"

namespace kpi {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

Grid::Grid(std::size_t nx, std::size_t ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (!is_power_of_two(nx) || nx < 8 || !is_power_of_two(ny) || ny < 8) {
    throw ContractError("grid sizes must be powers of two >= 8, got " + std::to_string(nx) + "x" +
                        std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw ContractError("box lengths must be positive and finite");
  }
}

double Grid::xi(int n) const noexcept { return 2.0 * std::numbers::pi * n / lx_; }
double Grid::mu(int m) const noexcept { return 2.0 * std::numbers::pi * m / ly_; }

std::vector<double> Grid::xi_lattice() const {
  std::vector<double> out;
  out.reserve(nx_);
  for (int n = min_x_mode(); n <= max_x_mode(); ++n) out.push_back(xi(n));
  return out;
}

std::vector<double> Grid::mu_lattice() const {
  std::vector<double> out;
  out.reserve(ny_);
  for (int m = min_y_mode(); m <= max_y_mode(); ++m) out.push_back(mu(m));
  return out;
}

Grid make_grid(std::size_t nx, std::size_t ny, double lx, double ly) { return Grid(nx, ny, lx, ly); }

}  // namespace kpi
