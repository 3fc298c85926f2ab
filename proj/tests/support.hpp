#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "kpi/fields.hpp"
#include "kpi/spectral.hpp"

namespace kpi::test {

inline constexpr double pi = std::numbers::pi;

inline RealField2D random_real(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(rng);
  return {g, std::move(v)};
}

/// Random real field with the zero fiber and Nyquist modes removed, optionally
/// band-limited to |n| <= band_x, |m| <= band_y.
inline SpectralField2D random_constrained(const Grid& g, std::mt19937_64& rng, int band_x = 1 << 20,
                                          int band_y = 1 << 20) {
  auto c = enforce_kp_constraint(to_spectral(random_real(g, rng)));
  std::vector<Complex> v(c.coeff().begin(), c.coeff().end());
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n)
    for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m)
      if (std::abs(n) > band_x || std::abs(m) > band_y) v[c.index(n, m)] = 0.0;
  return {g, std::move(v)};
}

template <typename F>
RealField2D sample(const Grid& g, F&& f) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      v[i * g.ny() + j] = f(g.dx() * static_cast<double>(i), g.dy() * static_cast<double>(j));
  return {g, std::move(v)};
}

inline double max_diff(const SpectralField2D& a, const SpectralField2D& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.coeff().size(); ++i) d = std::max(d, std::abs(a.coeff()[i] - b.coeff()[i]));
  return d;
}

inline double max_abs(const SpectralField2D& a) {
  double d = 0.0;
  for (auto c : a.coeff()) d = std::max(d, std::abs(c));
  return d;
}

}  // namespace kpi::test
