#include "kpi/bourgain.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "kpi/error.hpp"
#include "kpi/fft.hpp"
#include "kpi/spectral.hpp"

namespace kpi {

bool ModulationRegion::contains_frequency(double xi) const noexcept {
  return DyadicShell{k, k_at_most}.contains(xi);
}

bool ModulationRegion::contains_modulation(double sigma) const noexcept {
  const double a = std::abs(sigma);
  if (j_at_most || j == 0) return a < std::ldexp(1.5, j);
  return a >= std::ldexp(0.75, j) && a < std::ldexp(1.5, j);
}

bool ModulationRegion::contains(double xi, double mu, double tau) const {
  if (!contains_frequency(xi)) return false;
  return contains_modulation(tau - omega(xi, mu, mu_sign));
}

ModulationRegion region_le(int k, int j, double mu_sign) {
  return ModulationRegion{k, j, k == 0, true, mu_sign};
}

namespace {

// Accumulates ||eta_j(sigma) f||^2 for every j touched by the samples.
class ModulationAccumulator {
 public:
  void add(double sigma, double weight) {
    const double a = std::abs(sigma);
    if (a < BumpProfile::plateau) {
      bump(0, weight);
      return;
    }
    const int jc = static_cast<int>(std::floor(std::log2(a / 0.625)));
    for (int j = std::max(0, jc - 1); j <= jc + 1; ++j) {
      const double e = eta(j, a);
      if (e != 0.0) bump(j, e * e * weight);
    }
  }

  XkResult finish(double tau_nyquist) const {
    XkResult r;
    r.j_nyquist = tau_nyquist > 1.0 ? static_cast<int>(std::floor(std::log2(tau_nyquist))) : 0;
    r.j_top = static_cast<int>(acc_.size()) - 1;
    for (std::size_t j = 0; j < acc_.size(); ++j) {
      const double term = std::exp2(0.5 * static_cast<double>(j)) * std::sqrt(acc_[j]);
      r.value += term;
      if (static_cast<int>(j) > r.j_nyquist) r.tail += term;
    }
    return r;
  }

 private:
  void bump(int j, double w) {
    if (acc_.size() <= static_cast<std::size_t>(j)) acc_.resize(j + 1, 0.0);
    acc_[j] += w;
  }
  std::vector<double> acc_;
};

void check_support(double outside, double total, int k) {
  if (outside > kSupportTolerance * total) {
    throw ContractError("support violation: " + std::to_string(outside / total) +
                        " of the L2 mass lies outside the frequency shell k = " + std::to_string(k));
  }
}

}  // namespace

XkResult xk_norm(const SpaceTimeField& f, int k, double mu_sign) {
  if (k < 0) throw ContractError("xk_norm: k must be nonnegative");
  const double dv = f.cell_volume();
  double total = 0.0, outside = 0.0;
  for (std::size_t a = 0; a < f.xi().count; ++a) {
    const bool inside = in_projection_support(k, f.xi().value(a));
    for (std::size_t b = 0; b < f.mu().count; ++b)
      for (std::size_t c = 0; c < f.tau().count; ++c) {
        const double m = std::norm(f(a, b, c));
        total += m;
        if (!inside) outside += m;
      }
  }
  XkResult r;
  if (total == 0.0) return r;
  check_support(outside, total, k);
  ModulationAccumulator acc;
  for (std::size_t a = 0; a < f.xi().count; ++a) {
    const double xi = f.xi().value(a);
    if (!in_projection_support(k, xi)) continue;
    for (std::size_t b = 0; b < f.mu().count; ++b) {
      const double w = omega(xi, f.mu().value(b), mu_sign);
      for (std::size_t c = 0; c < f.tau().count; ++c) {
        const double m = std::norm(f(a, b, c));
        if (m != 0.0) acc.add(f.tau_value(a, b, c) - w, m * dv);
      }
    }
  }
  r = acc.finish(f.tau_nyquist());
  r.cut_fraction = outside / total;
  return r;
}

TimeSeries profile_series(const Trajectory& traj, double t_max) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 2) throw ContractError("profile_series: need at least two snapshots");
  TimeSeries out;
  out.t0 = snaps.front().t;
  out.dt = snaps[1].t - snaps[0].t;
  out.mu_sign = traj.mu_sign;
  out.profile = true;
  out.extension = TimeSeries::Extension::free;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const double expected = out.t0 + out.dt * static_cast<double>(i);
    if (t_max >= 0.0 && snaps[i].t > t_max * (1.0 + 1e-12)) break;
    if (std::abs(snaps[i].t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) break;
    out.samples.push_back(linear_propagate(snaps[i].field, -snaps[i].t, traj.mu_sign));
  }
  return out;
}

TimeSeries project_series(const TimeSeries& u, int k, ShellMode mode) {
  TimeSeries out = u;
  for (auto& s : out.samples) s = project_shell(s, k, mode);
  return out;
}

namespace {

struct WindowPlan {
  long first = 0;
  std::size_t count = 0;
  std::size_t n_pad = 0;
};

WindowPlan plan_window(const TimeSeries& u, int k, double t_k) {
  if (u.samples.empty()) throw ContractError("time series is empty");
  if (!(u.dt > 0.0)) throw ContractError("time series needs a positive spacing");
  if (u.dt > std::ldexp(0.5, -k)) {
    throw ContractError("time grid too coarse for the 2^-k window: dt = " + std::to_string(u.dt) + " > 2^{-k}/2");
  }
  if (u.extension == TimeSeries::Extension::free && !u.profile) {
    throw ContractError("free-evolution extension requires profile samples");
  }
  const double half = std::ldexp(BumpProfile::support, -k);
  WindowPlan p;
  p.first = static_cast<long>(std::ceil((t_k - half - u.t0) / u.dt));
  const long last = static_cast<long>(std::floor((t_k + half - u.t0) / u.dt));
  p.count = static_cast<std::size_t>(std::max(0L, last - p.first + 1));
  p.n_pad = 16;
  while (p.n_pad < 2 * p.count) p.n_pad *= 2;
  return p;
}

const SpectralField2D* sample_at(const TimeSeries& u, long i) {
  const long n = static_cast<long>(u.samples.size());
  if (i >= 0 && i < n) return &u.samples[static_cast<std::size_t>(i)];
  if (u.extension == TimeSeries::Extension::zero) return nullptr;
  return i < 0 ? &u.samples.front() : &u.samples.back();
}

// Calls visit(n, m, sigma_or_tau_axis, column) for every nonzero column of the
// windowed time transform with keep(n) true. Values are continuum space-time
// Fourier coefficients.
template <typename Keep, typename Visit>
void for_each_window_column(const TimeSeries& u, int k, double t_k, const WindowPlan& p, Keep&& keep, Visit&& visit) {
  const Grid& g = u.grid();
  std::vector<const SpectralField2D*> src(p.count);
  std::vector<double> w(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    const long idx = p.first + static_cast<long>(i);
    src[i] = sample_at(u, idx);
    w[i] = eta0(std::ldexp(u.t0 + u.dt * static_cast<double>(idx) - t_k, k));
  }
  auto& fft = cached_complex_fft({static_cast<int>(p.n_pad)});
  std::vector<Complex> col(p.n_pad);
  const double t_start = u.t0 + u.dt * static_cast<double>(p.first);
  const double dsigma = 2.0 * std::numbers::pi / (static_cast<double>(p.n_pad) * u.dt);
  const double scale = std::sqrt(g.lx() * g.ly()) * u.dt;
  std::vector<Complex> phase(p.n_pad);
  for (std::size_t c = 0; c < p.n_pad; ++c) {
    const long q = static_cast<long>(c) - static_cast<long>(p.n_pad / 2);
    phase[c] = scale * std::polar(1.0, -dsigma * static_cast<double>(q) * t_start);
  }
  std::vector<Complex> out(p.n_pad);
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n) {
    if (!keep(n)) continue;
    for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) {
      bool any = false;
      std::fill(col.begin(), col.end(), Complex{});
      for (std::size_t i = 0; i < p.count; ++i) {
        if (src[i] == nullptr || w[i] == 0.0) continue;
        const Complex v = (*src[i])(n, m);
        if (v == Complex{}) continue;
        col[i] = w[i] * v;
        any = true;
      }
      if (!any) continue;
      fft.execute(col, -1);
      // Reorder to centred sigma index q = c - n_pad/2.
      for (std::size_t c = 0; c < p.n_pad; ++c) {
        const std::size_t src_idx = (c + p.n_pad / 2) % p.n_pad;
        out[c] = phase[c] * col[src_idx];
      }
      visit(n, m, dsigma, std::span<const Complex>(out));
    }
  }
}

double series_outside_fraction(const TimeSeries& u, int k, double& total) {
  const Grid& g = u.grid();
  double outside = 0.0;
  total = 0.0;
  for (const auto& s : u.samples)
    for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n) {
      const bool inside = in_projection_support(k, g.xi(n));
      for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) {
        const double v = std::norm(s(n, m));
        total += v;
        if (!inside) outside += v;
      }
    }
  return outside;
}

WindowedNorm windowed_sup(const TimeSeries& u, int k, bool resolvent) {
  if (k < 0) throw ContractError("windowed norms need k >= 0");
  WindowedNorm best;
  double total = 0.0;
  const double outside = series_outside_fraction(u, k, total);
  if (total == 0.0) return best;
  check_support(outside, total, k);
  const Grid& g = u.grid();
  const double half = std::ldexp(BumpProfile::support, -k);
  const double spacing = std::ldexp(0.25, -k);
  const auto windows = static_cast<std::size_t>(std::ceil((u.t_end() - u.t0 + 2.0 * half) / spacing)) + 1;
  const double dvol = (2.0 * std::numbers::pi / g.lx()) * (2.0 * std::numbers::pi / g.ly());
  const double mod_shift = std::ldexp(1.0, k);
  for (std::size_t q = 0; q < windows; ++q) {
    const double t_k = u.t0 - half + spacing * static_cast<double>(q);
    const WindowPlan p = plan_window(u, k, t_k);
    if (p.count == 0) continue;
    ModulationAccumulator acc;
    // Profile columns share one sigma grid, so their weights can be pooled first.
    std::vector<double> pooled(u.profile ? p.n_pad : 0, 0.0);
    double pooled_dsigma = 0.0;
    const auto keep = [&](int n) { return in_projection_support(k, g.xi(n)); };
    for_each_window_column(u, k, t_k, p, keep, [&](int n, int m, double dsigma, std::span<const Complex> col) {
      if (u.profile) {
        pooled_dsigma = dsigma;
        for (std::size_t c = 0; c < col.size(); ++c) pooled[c] += std::norm(col[c]);
        return;
      }
      const double shift = -omega(g.xi(n), g.mu(m), u.mu_sign);
      for (std::size_t c = 0; c < col.size(); ++c) {
        const double sigma = dsigma * (static_cast<double>(c) - static_cast<double>(col.size() / 2)) + shift;
        double mag = std::norm(col[c]);
        if (resolvent) mag /= sigma * sigma + mod_shift * mod_shift;
        if (mag != 0.0) acc.add(sigma, mag * dvol * dsigma);
      }
    });
    for (std::size_t c = 0; c < pooled.size(); ++c) {
      const double sigma = pooled_dsigma * (static_cast<double>(c) - static_cast<double>(pooled.size() / 2));
      double mag = pooled[c];
      if (resolvent) mag /= sigma * sigma + mod_shift * mod_shift;
      if (mag != 0.0) acc.add(sigma, mag * dvol * pooled_dsigma);
    }
    const double nyq = std::numbers::pi / u.dt;
    const XkResult r = acc.finish(nyq);
    ++best.windows;
    if (r.value > best.value) {
      best.value = r.value;
      best.argmax_tk = t_k;
      best.tail = r.tail;
    }
  }
  return best;
}

}  // namespace

SpaceTimeField windowed_transform(const TimeSeries& u, int k, double t_k) {
  const WindowPlan p = plan_window(u, k, t_k);
  const Grid& g = u.grid();
  const double dsigma = 2.0 * std::numbers::pi / (static_cast<double>(std::max<std::size_t>(p.n_pad, 1)) * u.dt);
  LatticeAxis tau{dsigma, -static_cast<long>(p.n_pad / 2), p.n_pad};
  std::vector<Complex> values(g.size() * p.n_pad);
  std::vector<double> shift;
  if (u.profile) {
    shift.resize(g.size());
    for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n)
      for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) {
        const std::size_t col = static_cast<std::size_t>(n - g.min_x_mode()) * g.ny() + static_cast<std::size_t>(m - g.min_y_mode());
        shift[col] = n == 0 ? 0.0 : omega(g.xi(n), g.mu(m), u.mu_sign);
      }
  }
  if (p.count > 0) {
    for_each_window_column(u, k, t_k, p, [](int) { return true; }, [&](int n, int m, double, std::span<const Complex> col) {
      const std::size_t base =
          (static_cast<std::size_t>(n - g.min_x_mode()) * g.ny() + static_cast<std::size_t>(m - g.min_y_mode())) * p.n_pad;
      std::copy(col.begin(), col.end(), values.begin() + static_cast<long>(base));
    });
  }
  return {xi_axis(g), mu_axis(g), tau, std::move(values), std::move(shift)};
}

WindowedNorm fk_norm(const TimeSeries& u, int k) { return windowed_sup(u, k, false); }
WindowedNorm nk_norm(const TimeSeries& u, int k) { return windowed_sup(u, k, true); }

double es_norm(const Trajectory& traj, double s, double T) {
  if (traj.snapshots.empty()) throw ContractError("es_norm: empty trajectory");
  const auto& first = traj.snapshots.front().field;
  const double low = project_shell(first, 0, ShellMode::le_k).l2_norm();
  double sum = low * low;
  const int top = top_shell(first.grid());
  for (int k = 1; k <= top; ++k) {
    double best = 0.0;
    for (const auto& snap : traj.snapshots) {
      if (snap.t > T * (1.0 + 1e-12)) break;
      best = std::max(best, project_shell(snap.field, k).l2_norm());
    }
    sum += std::exp2(2.0 * s * k) * best * best;
  }
  return std::sqrt(sum);
}

namespace {

double aggregate(const TimeSeries& u, double s, bool resolvent) {
  if (u.samples.empty()) throw ContractError("empty time series");
  const int top = top_shell(u.grid());
  const auto low = project_series(u, 0, ShellMode::le_k);
  const double v0 = (resolvent ? nk_norm(low, 0) : fk_norm(low, 0)).value;
  double sum = v0 * v0;
  for (int k = 1; k <= top; ++k) {
    const auto pk = project_series(u, k);
    const double v = (resolvent ? nk_norm(pk, k) : fk_norm(pk, k)).value;
    sum += std::exp2(2.0 * s * k) * v * v;
  }
  return std::sqrt(sum);
}

}  // namespace

double fs_norm(const TimeSeries& u, double s) { return aggregate(u, s, false); }
double ns_norm(const TimeSeries& u, double s) { return aggregate(u, s, true); }

std::string NormReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["parameters"] = parameters;
  j["value"] = value;
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

}  // namespace kpi
