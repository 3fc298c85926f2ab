#include "kpi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "half_spectrum.hpp"
#include "kpi/dyadic.hpp"
#include "kpi/fft.hpp"
#include "kpi/spectral.hpp"

namespace kpi {

std::string to_string(Integrator integrator) {
  return integrator == Integrator::etdrk4 ? "etdrk4" : "if_rk4";
}

Integrator integrator_from_string(const std::string& name) {
  if (name == "etdrk4") return Integrator::etdrk4;
  if (name == "if_rk4") return Integrator::if_rk4;
  throw ContractError("unknown integrator '" + name + "' (expected etdrk4 or if_rk4)");
}

void SolverConfig::validate(const Grid& grid) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ContractError("t_end must be positive");
  if (dt > t_end) throw ContractError("dt must not exceed t_end");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) throw ContractError("dealias_fraction must lie in (0, 1]");
  const double kept = dealias_fraction * static_cast<double>(std::min(grid.nx(), grid.ny()) / 2);
  if (kept < 2.0) throw ContractError("dealiasing mask retains fewer than two modes");
  if (output_stride == 0) throw ContractError("output_stride must be positive");
  if (mu_sign != 1.0 && mu_sign != -1.0) throw ContractError("mu_sign must be +1 or -1");
  if (!(blowup_factor > 1.0)) throw ContractError("blowup_factor must exceed 1");
}

double omega(double xi, double mu, double mu_sign) {
  if (xi == 0.0) throw ContractError("omega is undefined on the xi = 0 fiber");
  return xi * xi * xi + mu_sign * mu * mu / xi;
}

bool dealias_keep(const Grid& grid, int n, int m, double fraction) {
  if (n == grid.min_x_mode() || m == grid.min_y_mode()) return false;
  const double a = n / (0.5 * static_cast<double>(grid.nx()));
  const double b = m / (0.5 * static_cast<double>(grid.ny()));
  return a * a + b * b <= fraction * fraction;
}

SpectralField2D dealias(const SpectralField2D& u, double fraction) {
  const Grid& g = u.grid();
  std::vector<Complex> c(u.coeff().begin(), u.coeff().end());
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n)
    for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m)
      if (!dealias_keep(g, n, m, fraction)) c[u.index(n, m)] = 0.0;
  return {g, std::move(c)};
}

SpectralField2D linear_propagate(const SpectralField2D& u, double t, double mu_sign) {
  return apply_symbol(u, [t, mu_sign](double xi, double mu) -> Complex {
    if (xi == 0.0) return 0.0;
    return std::polar(1.0, t * omega(xi, mu, mu_sign));
  });
}

double mass(const SpectralField2D& u) {
  const double n = u.l2_norm();
  return n * n;
}

double h10_norm(const SpectralField2D& u) { return hs0_norm(u, 1.0); }

double energy(const SpectralField2D& u, double mu_sign, double dealias_fraction) {
  if (!u.satisfies_kp_constraint(1e-12)) throw ContractError("energy: field violates the zero x-mean constraint");
  const Grid& g = u.grid();
  double quadratic = 0.0;
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n) {
    if (n == 0) continue;
    const double xi = g.xi(n);
    for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) {
      const double mu = g.mu(m);
      const double c2 = std::norm(u(n, m));
      quadratic += (xi * xi + mu_sign * (mu * mu) / (xi * xi)) * c2;
    }
  }
  const RealField2D phys = to_physical(dealias(u, dealias_fraction));
  double cubic = 0.0;
  for (double v : phys.values()) cubic += v * v * v;
  cubic *= g.dx() * g.dy();
  return 0.5 * quadratic - cubic / 6.0;
}

namespace {

// Time stepper on the FFTW half spectrum. Linear part is diagonal:
// L(xi, mu) = i omega(xi, mu) off the zero fiber, 0 on it and on Nyquist modes.
class Stepper {
 public:
  Stepper(const Grid& grid, const SolverConfig& cfg)
      : g_(grid), cfg_(cfg), fft_(grid.nx(), grid.ny()), hn_(detail::half_ny(grid)), size_(fft_.half_size()) {
    deriv_.assign(size_, Complex{});
    mask_.assign(size_, 0);
    lin_.assign(size_, Complex{});
    weight_.assign(size_, 0.0);
    h10w_.assign(size_, 0.0);
    const int ny2 = static_cast<int>(g_.ny() / 2);
    const double fscale = detail::forward_scale(g_);
    for (std::size_t a = 0; a < g_.nx(); ++a) {
      const int n = detail::x_mode_of(g_, a);
      const double xi = g_.xi(n);
      for (std::size_t b = 0; b < hn_; ++b) {
        const int m = static_cast<int>(b) == ny2 ? -ny2 : static_cast<int>(b);
        const std::size_t i = a * hn_ + b;
        const bool nyquist = n == g_.min_x_mode() || m == g_.min_y_mode();
        if (n != 0 && !nyquist) lin_[i] = Complex(0.0, omega(xi, g_.mu(m), cfg_.mu_sign));
        if (dealias_keep(g_, n, m, cfg_.dealias_fraction)) {
          mask_[i] = 1;
          deriv_[i] = Complex(0.0, -0.5 * xi * fscale);
        }
        weight_[i] = (b == 0 || static_cast<int>(b) == ny2) ? 1.0 : 2.0;
        h10w_[i] = weight_[i] * (1.0 + xi * xi);
      }
    }
    keep_.resize(size_, true);
    for (std::size_t a = 0; a < g_.nx(); ++a) {
      const int n = detail::x_mode_of(g_, a);
      for (std::size_t b = 0; b < hn_; ++b) {
        const int m = static_cast<int>(b) == ny2 ? -ny2 : static_cast<int>(b);
        keep_[a * hn_ + b] = !(n == 0 || n == g_.min_x_mode() || m == g_.min_y_mode());
      }
    }
    phys_.resize(g_.size());
    tmp_.resize(size_);
  }

  std::size_t size() const { return size_; }
  const std::vector<bool>& keep() const { return keep_; }

  void set_step(double h) {
    h_ = h;
    e_.resize(size_);
    e2_.resize(size_);
    if (cfg_.integrator == Integrator::etdrk4) {
      q_.resize(size_);
      f1_.resize(size_);
      f2_.resize(size_);
      f3_.resize(size_);
      // Contour average of the phi-functions avoids cancellation for small |L h|.
      constexpr int kPoints = 64;
      std::vector<Complex> roots(kPoints);
      for (int p = 0; p < kPoints; ++p) roots[p] = std::polar(1.0, 2.0 * std::numbers::pi * (p + 0.5) / kPoints);
      for (std::size_t i = 0; i < size_; ++i) {
        const Complex z = lin_[i] * h;
        e_[i] = std::exp(z);
        e2_[i] = std::exp(0.5 * z);
        Complex q{}, a{}, b{}, c{};
        for (const Complex& r : roots) {
          const Complex w = z + r;
          const Complex ew = std::exp(w);
          const Complex w3 = w * w * w;
          q += (std::exp(0.5 * w) - 1.0) / w;
          a += (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3;
          b += (2.0 + w + ew * (w - 2.0)) / w3;
          c += (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3;
        }
        q_[i] = h * q / double(kPoints);
        f1_[i] = h * a / double(kPoints);
        f2_[i] = h * b / double(kPoints);
        f3_[i] = h * c / double(kPoints);
      }
    } else {
      for (std::size_t i = 0; i < size_; ++i) {
        e_[i] = std::exp(lin_[i] * h);
        e2_[i] = std::exp(lin_[i] * (0.5 * h));
      }
    }
  }

  // out = mask * (-i xi / 2) F[(F^{-1}[mask v])^2]
  void nonlinear(std::span<const Complex> v, std::span<Complex> out) {
    for (std::size_t i = 0; i < size_; ++i) tmp_[i] = mask_[i] ? v[i] : Complex{};
    fft_.inverse(tmp_, phys_);
    const double s = detail::inverse_scale(g_);
    for (double& x : phys_) {
      x *= s;
      x *= x;
    }
    fft_.forward(phys_, out);
    for (std::size_t i = 0; i < size_; ++i) out[i] *= deriv_[i];
  }

  void step(std::vector<Complex>& v) {
    if (!cfg_.nonlinearity_on) {
      for (std::size_t i = 0; i < size_; ++i) v[i] *= e_[i];
      return;
    }
    if (cfg_.integrator == Integrator::etdrk4) {
      etdrk4(v);
    } else {
      ifrk4(v);
    }
  }

  double h10(std::span<const Complex> v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size_; ++i) s += h10w_[i] * std::norm(v[i]);
    return std::sqrt(s);
  }

 private:
  void ensure_work() {
    if (nv_.size() == size_) return;
    for (auto* w : {&nv_, &na_, &nb_, &nc_, &a_, &b_, &c_}) w->resize(size_);
  }

  // Cox-Matthews ETDRK4.
  void etdrk4(std::vector<Complex>& v) {
    ensure_work();
    nonlinear(v, nv_);
    for (std::size_t i = 0; i < size_; ++i) a_[i] = e2_[i] * v[i] + q_[i] * nv_[i];
    nonlinear(a_, na_);
    for (std::size_t i = 0; i < size_; ++i) b_[i] = e2_[i] * v[i] + q_[i] * na_[i];
    nonlinear(b_, nb_);
    for (std::size_t i = 0; i < size_; ++i) c_[i] = e2_[i] * a_[i] + q_[i] * (2.0 * nb_[i] - nv_[i]);
    nonlinear(c_, nc_);
    for (std::size_t i = 0; i < size_; ++i) {
      v[i] = e_[i] * v[i] + nv_[i] * f1_[i] + 2.0 * (na_[i] + nb_[i]) * f2_[i] + nc_[i] * f3_[i];
    }
  }

  // Classical RK4 in the integrating-factor variable.
  void ifrk4(std::vector<Complex>& v) {
    ensure_work();
    const double h = h_;
    nonlinear(v, nv_);
    for (std::size_t i = 0; i < size_; ++i) a_[i] = e2_[i] * (v[i] + 0.5 * h * nv_[i]);
    nonlinear(a_, na_);
    for (std::size_t i = 0; i < size_; ++i) b_[i] = e2_[i] * v[i] + 0.5 * h * na_[i];
    nonlinear(b_, nb_);
    for (std::size_t i = 0; i < size_; ++i) c_[i] = e_[i] * v[i] + h * e2_[i] * nb_[i];
    nonlinear(c_, nc_);
    for (std::size_t i = 0; i < size_; ++i) {
      v[i] = e_[i] * v[i] + (h / 6.0) * (e_[i] * nv_[i] + 2.0 * e2_[i] * (na_[i] + nb_[i]) + nc_[i]);
    }
  }

  Grid g_;
  SolverConfig cfg_;
  RealFft2D fft_;
  std::size_t hn_;
  std::size_t size_;
  double h_ = 0.0;
  std::vector<Complex> lin_, deriv_;
  std::vector<double> weight_, h10w_;
  std::vector<bool> keep_;
  std::vector<unsigned char> mask_;
  std::vector<Complex> e_, e2_, q_, f1_, f2_, f3_;
  std::vector<Complex> nv_, na_, nb_, nc_, a_, b_, c_;
  std::vector<double> phys_;
  std::vector<Complex> tmp_;
};

bool all_finite(std::span<const Complex> v) {
  for (const auto& c : v)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

}  // namespace

SpectralField2D nonlinear_rhs(const SpectralField2D& u, double dealias_fraction) {
  SolverConfig cfg;
  cfg.dealias_fraction = dealias_fraction;
  Stepper stepper(u.grid(), cfg);
  std::vector<Complex> half(stepper.size()), out(stepper.size());
  detail::full_to_half(u, half);
  stepper.nonlinear(half, out);
  return detail::half_to_full(u.grid(), out);
}

TrajectorySnapshot make_snapshot(double t, SpectralField2D field, const SolverConfig& config) {
  TrajectorySnapshot s{t, std::move(field), 0.0, 0.0, {}};
  s.mass = mass(s.field);
  s.energy = energy(s.field, config.mu_sign, config.dealias_fraction);
  for (double order : config.hs_orders) s.hs_norms[order] = hs0_norm(s.field, order);
  return s;
}

Trajectory evolve(const SpectralField2D& phi, const SolverConfig& config) {
  const Grid& g = phi.grid();
  config.validate(g);
  if (!phi.satisfies_kp_constraint(1e-12)) throw ContractError("evolve: initial data violates the zero x-mean constraint");

  Trajectory traj;
  traj.dealias_fraction = config.dealias_fraction;
  traj.mu_sign = config.mu_sign;
  const auto n_steps = static_cast<std::size_t>(std::ceil(config.t_end / config.dt - 1e-9));
  traj.step = config.t_end / static_cast<double>(n_steps);

  Stepper stepper(g, config);
  stepper.set_step(traj.step);
  std::vector<Complex> v(stepper.size());
  detail::full_to_half(phi, v);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!stepper.keep()[i]) v[i] = 0.0;

  traj.snapshots.push_back(make_snapshot(0.0, detail::half_to_full(g, v), config));
  const double h10_initial = stepper.h10(v);
  const double threshold = config.blowup_factor * h10_initial;

  for (std::size_t k = 1; k <= n_steps; ++k) {
    stepper.step(v);
    const double t = traj.step * static_cast<double>(k);
    traj.steps_taken = k;
    if (!all_finite(v)) {
      throw NonFiniteStateError("non-finite coefficients at t = " + std::to_string(t) + " (step " + std::to_string(k) + ")",
                                traj.snapshots.back());
    }
    const bool blown = h10_initial > 0.0 && stepper.h10(v) > threshold;
    if (k % config.output_stride == 0 || k == n_steps || blown) {
      traj.snapshots.push_back(make_snapshot(t, detail::half_to_full(g, v), config));
    }
    if (blown) {
      traj.blew_up = true;
      break;
    }
  }
  return traj;
}

SpectralField2D scale_solution(const SpectralField2D& u, int m) {
  const Grid& g = u.grid();
  const double lambda = std::ldexp(1.0, m);
  const double lx = g.lx() / lambda;
  const double ly = g.ly() / (lambda * lambda);
  if (!std::isnormal(lx) || !std::isnormal(ly)) throw ContractError("scale_solution: scaled box is not representable");
  const Grid scaled(g.nx(), g.ny(), lx, ly);
  const double top = std::max(std::abs(scaled.xi(g.min_x_mode())), std::abs(scaled.mu(g.min_y_mode())));
  if (!std::isfinite(top * top * top) || top * top * top > 1e300) {
    throw ContractError("scale_solution: mode overflow (wavenumbers beyond representable range)");
  }
  const double factor = std::exp2(0.5 * m);
  std::vector<Complex> c(u.coeff().begin(), u.coeff().end());
  for (auto& v : c) v *= factor;
  return {scaled, std::move(c)};
}

}  // namespace kpi
