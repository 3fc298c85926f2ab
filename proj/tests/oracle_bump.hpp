#pragma once

#include <cmath>

namespace kpi::test {

// Independent reimplementation of the bump, used as an oracle.
inline double bump(double x) {
  const double a = std::fabs(x);
  if (a <= 1.25) return 1.0;
  if (a >= 1.6) return 0.0;
  const double s = (1.6 - a) / 0.35;
  const double p = std::exp(-1.0 / s);
  const double q = s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  return p / (p + q);
}

inline double shell_weight(int j, double x) {
  const double a = std::fabs(x);
  if (j == 0) return bump(a);
  return bump(a / std::pow(2.0, j)) - bump(a / std::pow(2.0, j - 1));
}

}  // namespace kpi::test
