#pragma once

#include "kpi/fields.hpp"

namespace kpi {

/// Smooth even bump: 1 on [-5/4, 5/4], 0 outside [-8/5, 8/5], with the
/// transition g(s) = psi(s) / (psi(s) + psi(1 - s)), psi(s) = e^{-1/s} [s > 0].
struct BumpProfile {
  static constexpr double plateau = 5.0 / 4.0;
  static constexpr double support = 8.0 / 5.0;
  double operator()(double x) const noexcept;
};

double eta0(double x) noexcept;

/// chi_k(xi) = eta0(|xi| / 2^k) - eta0(|xi| / 2^{k-1}), k any integer.
double chi(int k, double xi) noexcept;

/// eta_0 = eta0 and eta_j = chi_j for j >= 1.
double eta(int j, double x) noexcept;

/// eta_{<=l}(x) = eta0(|x| / 2^l).
double eta_le(int l, double x) noexcept;

/// I_k = {|xi| in [(3/4) 2^k, (3/2) 2^k)}; I_{<=k} = {0 < |xi| < (3/2) 2^k}.
struct DyadicShell {
  int k = 0;
  bool at_most = false;

  bool contains(double xi) const noexcept;
  double lower() const noexcept;
  double upper() const noexcept;
};

/// Support of chi_k (k >= 1) or of eta0 (k = 0, the low-frequency piece).
bool in_projection_support(int k, double xi) noexcept;

enum class ShellMode { exact_k, le_k };

/// P_k (multiplier chi_k(xi)) or P_{<=k} (multiplier eta0(|xi| / 2^k)).
SpectralField2D project_shell(const SpectralField2D& u, int k, ShellMode mode = ShellMode::exact_k);

/// ||(1 + xi^2)^{s/2} c||_{l^2}; s = 0 is the L2 norm.
double hs0_norm(const SpectralField2D& u, double s);

/// Largest k with a nonzero P_k multiplier somewhere on the grid.
int top_shell(const Grid& grid) noexcept;

}  // namespace kpi
