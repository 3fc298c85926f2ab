#include "kpi/spectral.hpp"

#include <cmath>

#include "half_spectrum.hpp"
#include "kpi/error.hpp"
#include "kpi/fft.hpp"

namespace kpi {
namespace detail {

void full_to_half(const SpectralField2D& u, std::span<Complex> half) {
  const Grid& g = u.grid();
  const std::size_t hn = half_ny(g);
  const int ny2 = static_cast<int>(g.ny() / 2);
  for (std::size_t a = 0; a < g.nx(); ++a) {
    const int n = x_mode_of(g, a);
    for (std::size_t b = 0; b < hn; ++b) {
      const int m = static_cast<int>(b) == ny2 ? -ny2 : static_cast<int>(b);
      half[a * hn + b] = u(n, m);
    }
  }
}

SpectralField2D half_to_full(const Grid& g, std::span<const Complex> half) {
  const std::size_t hn = half_ny(g);
  const int ny2 = static_cast<int>(g.ny() / 2);
  const int nx2 = static_cast<int>(g.nx() / 2);
  std::vector<Complex> c(g.size());
  auto idx = [&](int n, int m) {
    return static_cast<std::size_t>(n + nx2) * g.ny() + static_cast<std::size_t>(m + ny2);
  };
  auto wrap_x = [&](int n) { return n < -nx2 ? n + static_cast<int>(g.nx()) : (n >= nx2 ? n - static_cast<int>(g.nx()) : n); };
  for (std::size_t a = 0; a < g.nx(); ++a) {
    const int n = x_mode_of(g, a);
    for (std::size_t b = 0; b < hn; ++b) {
      const Complex v = half[a * hn + b];
      const int m = static_cast<int>(b);
      if (m == ny2) {
        c[idx(n, -ny2)] = v;
      } else {
        c[idx(n, m)] = v;
        if (m > 0) c[idx(wrap_x(-n), -m)] = std::conj(v);
      }
    }
  }
  return {g, std::move(c)};
}

}  // namespace detail

SpectralField2D to_spectral(const RealField2D& u) {
  const Grid& g = u.grid();
  auto& fft = cached_real_fft(g.nx(), g.ny());
  std::vector<Complex> half(fft.half_size());
  fft.forward(u.values(), half);
  const double s = detail::forward_scale(g);
  for (auto& v : half) v *= s;
  return detail::half_to_full(g, half);
}

RealField2D to_physical(const SpectralField2D& u) {
  const Grid& g = u.grid();
  auto& fft = cached_real_fft(g.nx(), g.ny());
  std::vector<Complex> half(fft.half_size());
  detail::full_to_half(u, half);
  std::vector<double> values(g.size());
  fft.inverse(half, values);
  const double s = detail::inverse_scale(g);
  for (auto& v : values) v *= s;
  return {g, std::move(values)};
}

std::vector<Complex> to_physical_complex(const SpectralField2D& u) {
  const Grid& g = u.grid();
  auto& fft = cached_complex_fft({static_cast<int>(g.nx()), static_cast<int>(g.ny())});
  std::vector<Complex> buf(g.size());
  for (std::size_t a = 0; a < g.nx(); ++a) {
    const int n = detail::x_mode_of(g, a);
    for (std::size_t b = 0; b < g.ny(); ++b) {
      const int m = b < g.ny() / 2 ? static_cast<int>(b) : static_cast<int>(b) - static_cast<int>(g.ny());
      buf[a * g.ny() + b] = u(n, m);
    }
  }
  fft.execute(buf, +1);
  const double s = detail::inverse_scale(g);
  for (auto& v : buf) v *= s;
  return buf;
}

SpectralField2D apply_symbol(const SpectralField2D& u, const Symbol& symbol) {
  const Grid& g = u.grid();
  std::vector<Complex> c(g.size());
  for (int n = g.min_x_mode() + 1; n <= g.max_x_mode(); ++n) {
    const double xi = g.xi(n);
    for (int m = g.min_y_mode() + 1; m <= g.max_y_mode(); ++m) {
      const Complex v = u(n, m);
      if (v == Complex{}) continue;
      const Complex s = symbol(xi, g.mu(m));
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
        throw ContractError("symbol is not finite at live mode (" + std::to_string(n) + ", " + std::to_string(m) + ")");
      }
      c[u.index(n, m)] = s * v;
    }
  }
  return {g, std::move(c)};
}

SpectralField2D dx_inverse(const SpectralField2D& u) {
  if (!u.satisfies_kp_constraint(1e-12)) {
    throw ContractError("dx_inverse: field violates the zero x-mean constraint (|c(0,m)| = " +
                        std::to_string(u.zero_fiber_residue()) + ")");
  }
  return apply_symbol(u, [](double xi, double) -> Complex {
    if (xi == 0.0) return 0.0;
    return 1.0 / Complex(0.0, xi);
  });
}

SpectralField2D dx(const SpectralField2D& u) {
  return apply_symbol(u, [](double xi, double) { return Complex(0.0, xi); });
}

double inner_product(const SpectralField2D& u, const SpectralField2D& v) {
  if (!(u.grid() == v.grid())) throw ContractError("inner_product: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.coeff().size(); ++i) s += (std::conj(u.coeff()[i]) * v.coeff()[i]).real();
  return s;
}

}  // namespace kpi
