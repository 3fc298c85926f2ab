#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kpi/error.hpp"
#include "kpi/fields.hpp"

namespace kpi {

enum class Integrator { etdrk4, if_rk4 };

std::string to_string(Integrator integrator);
Integrator integrator_from_string(const std::string& name);

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double dealias_fraction = 2.0 / 3.0;
  Integrator integrator = Integrator::etdrk4;
  bool nonlinearity_on = true;
  /// Steps between stored snapshots; the initial and final states are always stored.
  std::size_t output_stride = 1;
  /// +1 for KP-I, -1 for KP-II.
  double mu_sign = 1.0;
  std::vector<double> hs_orders = {0.0, 1.0};
  double blowup_factor = 1e6;

  void validate(const Grid& grid) const;
};

struct TrajectorySnapshot {
  double t = 0.0;
  SpectralField2D field;
  double mass = 0.0;
  double energy = 0.0;
  std::map<double, double> hs_norms;
};

struct Trajectory {
  std::vector<TrajectorySnapshot> snapshots;
  /// Step actually used: t_end / ceil(t_end / dt).
  double step = 0.0;
  std::size_t steps_taken = 0;
  bool blew_up = false;
  double dealias_fraction = 2.0 / 3.0;
  double mu_sign = 1.0;

  const Grid& grid() const { return snapshots.front().field.grid(); }
  const TrajectorySnapshot& back() const { return snapshots.back(); }
};

/// Thrown by evolve when the state stops being finite. Carries the last finite
/// snapshot for diagnosis.
class NonFiniteStateError : public NumericalError {
 public:
  NonFiniteStateError(const std::string& what, TrajectorySnapshot last_good)
      : NumericalError(what), last_good_(std::move(last_good)) {}
  const TrajectorySnapshot& last_good() const noexcept { return last_good_; }

 private:
  TrajectorySnapshot last_good_;
};

/// Dispersion relation xi^3 + mu_sign mu^2 / xi. xi must be nonzero.
double omega(double xi, double mu, double mu_sign = 1.0);

/// Whether mode (n, m) survives the circular dealiasing mask of the given
/// fraction. Nyquist modes never do.
bool dealias_keep(const Grid& grid, int n, int m, double fraction);
SpectralField2D dealias(const SpectralField2D& u, double fraction);

/// Free KP evolution: c(xi,mu) -> e^{i t omega(xi,mu)} c(xi,mu).
SpectralField2D linear_propagate(const SpectralField2D& u, double t, double mu_sign = 1.0);

/// -d_x(u^2)/2 with the dealiasing mask applied before and after squaring.
SpectralField2D nonlinear_rhs(const SpectralField2D& u, double dealias_fraction = 2.0 / 3.0);

/// M(u) = integral of u^2.
double mass(const SpectralField2D& u);

/// E(u) = integral of u_x^2/2 + mu_sign (d_x^{-1} u_y)^2 / 2 - u^3/6. The cubic
/// term is a lattice sum of the dealiased field.
double energy(const SpectralField2D& u, double mu_sign = 1.0, double dealias_fraction = 2.0 / 3.0);

/// H^{1,0} norm used by the blow-up monitor.
double h10_norm(const SpectralField2D& u);

/// Integrates u_t = i omega u - d_x(u^2)/2 from phi up to config.t_end.
/// Stops early with blew_up = true if the H^{1,0} norm exceeds blowup_factor
/// times its initial value. Throws NonFiniteStateError on NaN/Inf.
Trajectory evolve(const SpectralField2D& phi, const SolverConfig& config);

/// v(x,y) = lambda^2 u(lambda x, lambda^2 y) with lambda = 2^m, returned on the
/// box (lx / lambda, ly / lambda^2) with the same mode counts.
SpectralField2D scale_solution(const SpectralField2D& u, int m);

/// Snapshot built from a field with all monitors evaluated.
TrajectorySnapshot make_snapshot(double t, SpectralField2D field, const SolverConfig& config);

}  // namespace kpi
