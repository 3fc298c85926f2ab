#pragma once

// Conversions between the centred full-spectrum storage of SpectralField2D and
// the FFTW half-spectrum layout used by the time stepper.

#include <span>

#include "kpi/fields.hpp"

namespace kpi::detail {

inline std::size_t half_ny(const Grid& g) noexcept { return g.ny() / 2 + 1; }

/// Signed x-mode of FFT-order index a.
inline int x_mode_of(const Grid& g, std::size_t a) noexcept {
  return a < g.nx() / 2 ? static_cast<int>(a) : static_cast<int>(a) - static_cast<int>(g.nx());
}

void full_to_half(const SpectralField2D& u, std::span<Complex> half);
SpectralField2D half_to_full(const Grid& g, std::span<const Complex> half);

/// Scale between unnormalised DFT sums and the unitary coefficients.
inline double forward_scale(const Grid& g) noexcept {
  return std::sqrt(g.lx() * g.ly()) / static_cast<double>(g.size());
}
inline double inverse_scale(const Grid& g) noexcept { return 1.0 / std::sqrt(g.lx() * g.ly()); }

}  // namespace kpi::detail
