#pragma once

#include <cstddef>
#include <vector>

#include "kpi/fields.hpp"

namespace kpi {

/// Window {spacing * (first + i) : 0 <= i < count} of a uniform lattice.
struct LatticeAxis {
  double spacing = 1.0;
  long first = 0;
  std::size_t count = 0;

  double value(std::size_t i) const noexcept { return spacing * static_cast<double>(first + static_cast<long>(i)); }
  bool operator==(const LatticeAxis&) const = default;
};

/// Lattice in the Fourier axes of a periodic box (modes -n/2 .. n/2-1).
LatticeAxis xi_axis(const Grid& grid);
LatticeAxis mu_axis(const Grid& grid);
/// tau axis for a time period l_tau sampled with n_tau points.
LatticeAxis tau_axis(std::size_t n_tau, double l_tau);

/// Samples f(xi, mu, tau) on a product lattice, index (a * n_mu + b) * n_tau + c.
///
/// An optional per-column shift moves the tau samples of column (a, b) to
/// tau_axis.value(c) + shift(a, b); fields built in the modulation frame use
/// shift = omega(xi, mu) so tau - omega is the lattice value itself. The L2
/// norm uses the cell volume d_xi d_mu d_tau.
class SpaceTimeField {
 public:
  SpaceTimeField(LatticeAxis xi, LatticeAxis mu, LatticeAxis tau);
  SpaceTimeField(LatticeAxis xi, LatticeAxis mu, LatticeAxis tau, std::vector<Complex> values,
                 std::vector<double> tau_shift = {});

  static SpaceTimeField on_grid(const Grid& grid, std::size_t n_tau, double l_tau);

  const LatticeAxis& xi() const noexcept { return xi_; }
  const LatticeAxis& mu() const noexcept { return mu_; }
  const LatticeAxis& tau() const noexcept { return tau_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t index(std::size_t a, std::size_t b, std::size_t c) const noexcept {
    return (a * mu_.count + b) * tau_.count + c;
  }

  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  Complex operator()(std::size_t a, std::size_t b, std::size_t c) const { return values_[index(a, b, c)]; }
  Complex& operator()(std::size_t a, std::size_t b, std::size_t c) { return values_[index(a, b, c)]; }

  bool has_tau_shift() const noexcept { return !tau_shift_.empty(); }
  double tau_shift(std::size_t a, std::size_t b) const noexcept {
    return tau_shift_.empty() ? 0.0 : tau_shift_[a * mu_.count + b];
  }
  double tau_value(std::size_t a, std::size_t b, std::size_t c) const noexcept {
    return tau_.value(c) + tau_shift(a, b);
  }

  double cell_volume() const noexcept { return xi_.spacing * mu_.spacing * tau_.spacing; }
  double l2_norm() const noexcept;
  /// Nyquist frequency of the tau axis, pi / dt of the underlying time grid.
  double tau_nyquist() const noexcept { return 0.5 * static_cast<double>(tau_.count) * tau_.spacing; }

  bool same_lattice(const SpaceTimeField& o) const noexcept {
    return xi_ == o.xi_ && mu_ == o.mu_ && tau_ == o.tau_ && tau_shift_ == o.tau_shift_;
  }

 private:
  LatticeAxis xi_, mu_, tau_;
  std::vector<Complex> values_;
  std::vector<double> tau_shift_;
};

SpaceTimeField operator+(const SpaceTimeField& a, const SpaceTimeField& b);
SpaceTimeField operator*(Complex s, const SpaceTimeField& a);

}  // namespace kpi
