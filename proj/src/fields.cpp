#include "kpi/fields.hpp"

#include <algorithm>
#include <cmath>

#include "kpi/error.hpp"

namespace kpi {

RealField2D::RealField2D(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

RealField2D::RealField2D(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ContractError("real field shape does not match grid");
}

double RealField2D::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SpectralField2D::SpectralField2D(Grid grid) : grid_(grid), coeff_(grid.size(), Complex{}) {}

SpectralField2D::SpectralField2D(Grid grid, std::vector<Complex> coeff) : grid_(grid), coeff_(std::move(coeff)) {
  if (coeff_.size() != grid_.size()) throw ContractError("spectral field shape does not match grid");
}

double SpectralField2D::l2_norm() const noexcept {
  double s = 0.0;
  for (const auto& c : coeff_) s += std::norm(c);
  return std::sqrt(s);
}

double SpectralField2D::zero_fiber_residue() const noexcept {
  double r = 0.0;
  for (int m = grid_.min_y_mode(); m <= grid_.max_y_mode(); ++m) r = std::max(r, std::abs((*this)(0, m)));
  return r;
}

double SpectralField2D::hermitian_residue() const noexcept {
  double r = 0.0;
  for (int n = grid_.min_x_mode() + 1; n <= grid_.max_x_mode(); ++n) {
    for (int m = grid_.min_y_mode() + 1; m <= grid_.max_y_mode(); ++m) {
      r = std::max(r, std::abs((*this)(-n, -m) - std::conj((*this)(n, m))));
    }
  }
  return r;
}

double SpectralField2D::nyquist_residue() const noexcept {
  double r = 0.0;
  for (int m = grid_.min_y_mode(); m <= grid_.max_y_mode(); ++m) r = std::max(r, std::abs((*this)(grid_.min_x_mode(), m)));
  for (int n = grid_.min_x_mode(); n <= grid_.max_x_mode(); ++n) r = std::max(r, std::abs((*this)(n, grid_.min_y_mode())));
  return r;
}

bool SpectralField2D::satisfies_kp_constraint(double tol) const noexcept {
  return zero_fiber_residue() <= tol * std::max(1.0, l2_norm());
}

namespace {

void require_same_grid(const SpectralField2D& a, const SpectralField2D& b) {
  if (!(a.grid() == b.grid())) throw ContractError("fields live on different grids");
}

}  // namespace

SpectralField2D operator+(const SpectralField2D& a, const SpectralField2D& b) {
  require_same_grid(a, b);
  std::vector<Complex> c(a.coeff().begin(), a.coeff().end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b.coeff()[i];
  return {a.grid(), std::move(c)};
}

SpectralField2D operator-(const SpectralField2D& a, const SpectralField2D& b) {
  require_same_grid(a, b);
  std::vector<Complex> c(a.coeff().begin(), a.coeff().end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b.coeff()[i];
  return {a.grid(), std::move(c)};
}

SpectralField2D operator*(double s, const SpectralField2D& a) {
  std::vector<Complex> c(a.coeff().begin(), a.coeff().end());
  for (auto& v : c) v *= s;
  return {a.grid(), std::move(c)};
}

SpectralField2D enforce_kp_constraint(const SpectralField2D& f) {
  const Grid& g = f.grid();
  std::vector<Complex> c(f.coeff().begin(), f.coeff().end());
  for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) {
    c[f.index(0, m)] = 0.0;
    c[f.index(g.min_x_mode(), m)] = 0.0;
  }
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n) c[f.index(n, g.min_y_mode())] = 0.0;
  return {g, std::move(c)};
}

}  // namespace kpi
