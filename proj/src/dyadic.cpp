#include "kpi/dyadic.hpp"

#include <cmath>

namespace kpi {
namespace {

double psi(double s) noexcept { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

double BumpProfile::operator()(double x) const noexcept {
  const double a = std::abs(x);
  if (a <= plateau) return 1.0;
  if (a >= support) return 0.0;
  const double s = (support - a) / (support - plateau);
  const double p = psi(s);
  return p / (p + psi(1.0 - s));
}

double eta0(double x) noexcept { return BumpProfile{}(x); }

double chi(int k, double xi) noexcept {
  const double a = std::abs(xi);
  return eta0(std::ldexp(a, -k)) - eta0(std::ldexp(a, 1 - k));
}

double eta(int j, double x) noexcept { return j == 0 ? eta0(x) : chi(j, x); }

double eta_le(int l, double x) noexcept { return eta0(std::ldexp(std::abs(x), -l)); }

bool DyadicShell::contains(double xi) const noexcept {
  const double a = std::abs(xi);
  if (at_most) return a > 0.0 && a < upper();
  return a >= lower() && a < upper();
}

double DyadicShell::lower() const noexcept { return at_most ? 0.0 : std::ldexp(0.75, k); }
double DyadicShell::upper() const noexcept { return std::ldexp(1.5, k); }

bool in_projection_support(int k, double xi) noexcept {
  const double a = std::abs(xi);
  if (a == 0.0) return false;
  const double hi = std::ldexp(BumpProfile::support, k);
  if (k == 0) return a < hi;
  return a > std::ldexp(BumpProfile::plateau, k - 1) && a < hi;
}

SpectralField2D project_shell(const SpectralField2D& u, int k, ShellMode mode) {
  const Grid& g = u.grid();
  std::vector<Complex> c(u.coeff().begin(), u.coeff().end());
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n) {
    const double xi = g.xi(n);
    const double w = mode == ShellMode::exact_k ? chi(k, xi) : eta_le(k, xi);
    for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) c[u.index(n, m)] *= w;
  }
  return {g, std::move(c)};
}

double hs0_norm(const SpectralField2D& u, double s) {
  const Grid& g = u.grid();
  double acc = 0.0;
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n) {
    const double xi = g.xi(n);
    const double w = std::pow(1.0 + xi * xi, s);
    double row = 0.0;
    for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) row += std::norm(u(n, m));
    acc += w * row;
  }
  return std::sqrt(acc);
}

int top_shell(const Grid& grid) noexcept {
  const double xmax = std::abs(grid.xi(grid.min_x_mode()));
  int k = 0;
  while (std::ldexp(BumpProfile::plateau, k) < xmax) ++k;
  return k;
}

}  // namespace kpi
