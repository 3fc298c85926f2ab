#pragma once

#include <functional>
#include <vector>

#include "kpi/fields.hpp"

namespace kpi {

/// Physical -> spectral. Exact DFT: the Nyquist content of the input is kept.
SpectralField2D to_spectral(const RealField2D& u);
/// Spectral -> physical, assuming Hermitian symmetry.
RealField2D to_physical(const SpectralField2D& u);
/// Spectral -> physical without assuming symmetry; used to measure the
/// imaginary residue of an operation.
std::vector<Complex> to_physical_complex(const SpectralField2D& u);

using Symbol = std::function<Complex(double xi, double mu)>;

/// c'(xi,mu) = symbol(xi,mu) c(xi,mu). The symbol is only evaluated on modes
/// with nonzero coefficient; Nyquist modes are zeroed in the output.
/// Throws ContractError if the symbol is not finite on a live mode.
SpectralField2D apply_symbol(const SpectralField2D& u, const Symbol& symbol);

/// Spectral antiderivative in x: c / (i xi) off the zero fiber, 0 on it.
/// Throws ContractError if |c(0,m)| exceeds 1e-12 * max(1, ||u||).
SpectralField2D dx_inverse(const SpectralField2D& u);

SpectralField2D dx(const SpectralField2D& u);

/// L2 inner product <u, v> = integral of u v over the box (both real fields).
double inner_product(const SpectralField2D& u, const SpectralField2D& v);

}  // namespace kpi
