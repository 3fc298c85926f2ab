#include "kpi/spacetime.hpp"

#include <cmath>
#include <numbers>

#include "kpi/error.hpp"

namespace kpi {

LatticeAxis xi_axis(const Grid& grid) {
  return {2.0 * std::numbers::pi / grid.lx(), grid.min_x_mode(), grid.nx()};
}

LatticeAxis mu_axis(const Grid& grid) {
  return {2.0 * std::numbers::pi / grid.ly(), grid.min_y_mode(), grid.ny()};
}

LatticeAxis tau_axis(std::size_t n_tau, double l_tau) {
  if (n_tau == 0 || !(l_tau > 0.0)) throw ContractError("tau axis needs n_tau > 0 and a positive period");
  return {2.0 * std::numbers::pi / l_tau, -static_cast<long>(n_tau / 2), n_tau};
}

SpaceTimeField::SpaceTimeField(LatticeAxis xi, LatticeAxis mu, LatticeAxis tau)
    : xi_(xi), mu_(mu), tau_(tau), values_(xi.count * mu.count * tau.count) {}

SpaceTimeField::SpaceTimeField(LatticeAxis xi, LatticeAxis mu, LatticeAxis tau, std::vector<Complex> values,
                               std::vector<double> tau_shift)
    : xi_(xi), mu_(mu), tau_(tau), values_(std::move(values)), tau_shift_(std::move(tau_shift)) {
  if (values_.size() != xi_.count * mu_.count * tau_.count) throw ContractError("space-time field shape mismatch");
  if (!tau_shift_.empty() && tau_shift_.size() != xi_.count * mu_.count) {
    throw ContractError("space-time field tau shift has the wrong size");
  }
}

SpaceTimeField SpaceTimeField::on_grid(const Grid& grid, std::size_t n_tau, double l_tau) {
  return {xi_axis(grid), mu_axis(grid), tau_axis(n_tau, l_tau)};
}

double SpaceTimeField::l2_norm() const noexcept {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return std::sqrt(s * cell_volume());
}

SpaceTimeField operator+(const SpaceTimeField& a, const SpaceTimeField& b) {
  if (!a.same_lattice(b)) throw ContractError("space-time fields live on different lattices");
  std::vector<Complex> v(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.values()[i];
  std::vector<double> shift;
  if (a.has_tau_shift()) {
    shift.resize(a.xi().count * a.mu().count);
    for (std::size_t i = 0; i < a.xi().count; ++i)
      for (std::size_t j = 0; j < a.mu().count; ++j) shift[i * a.mu().count + j] = a.tau_shift(i, j);
  }
  return {a.xi(), a.mu(), a.tau(), std::move(v), std::move(shift)};
}

SpaceTimeField operator*(Complex s, const SpaceTimeField& a) {
  SpaceTimeField out = a;
  for (auto& v : out.values()) v *= s;
  return out;
}

}  // namespace kpi
