#pragma once

#include <map>
#include <string>
#include <vector>

#include "kpi/dyadic.hpp"
#include "kpi/solver.hpp"
#include "kpi/spacetime.hpp"

namespace kpi {

/// D_{k,j} and its cumulative forms. Frequency: I_k, or I_{<=k} when
/// k_at_most. Modulation tau - omega: I_j, or I_{<=j} = (-(3/2) 2^j, (3/2) 2^j)
/// when j_at_most. The modulation shell j = 0 is read as I_{<=0}.
struct ModulationRegion {
  int k = 0;
  int j = 0;
  bool k_at_most = false;
  bool j_at_most = true;
  double mu_sign = 1.0;

  bool contains(double xi, double mu, double tau) const;
  bool contains_frequency(double xi) const noexcept;
  bool contains_modulation(double sigma) const noexcept;
};

/// D_{k,<=j} with the X_k convention that k = 0 means I_{<=0}.
ModulationRegion region_le(int k, int j, double mu_sign = 1.0);

struct XkResult {
  /// sum_j 2^{j/2} ||eta_j(tau - omega) f||, over every j the data reaches.
  double value = 0.0;
  /// Part of value from j above floor(log2(tau Nyquist)).
  double tail = 0.0;
  int j_nyquist = 0;
  int j_top = 0;
  /// Relative L2 mass removed by the support cut.
  double cut_fraction = 0.0;
};

/// Relative mass allowed outside the frequency support before xk_norm rejects.
inline constexpr double kSupportTolerance = 1e-10;

/// X_k norm. f must be supported, up to kSupportTolerance of its L2 mass, in the
/// support of chi_k (of eta0 when k = 0); the remainder is cut before evaluation.
XkResult xk_norm(const SpaceTimeField& f, int k, double mu_sign = 1.0);

/// Spatial spectra sampled on a uniform time grid t0 + i dt.
///
/// When `profile` is set the samples are the interaction-picture profile
/// W(-t) u(t); this is how solver output is fed in, since the profile varies on
/// the nonlinear time scale rather than on 1/omega.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<SpectralField2D> samples;
  bool profile = true;
  /// Outside the sampled interval the field is continued by free evolution
  /// (profile held constant) or by zero.
  enum class Extension { zero, free } extension = Extension::zero;
  double mu_sign = 1.0;

  const Grid& grid() const { return samples.front().grid(); }
  double t_end() const { return t0 + dt * static_cast<double>(samples.size() - 1); }
};

TimeSeries profile_series(const Trajectory& traj, double t_max = -1.0);
TimeSeries project_series(const TimeSeries& u, int k, ShellMode mode = ShellMode::exact_k);

struct WindowedNorm {
  double value = 0.0;
  double argmax_tk = 0.0;
  double tail = 0.0;
  std::size_t windows = 0;
};

/// F[u eta0(2^k (t - t_k))] as a modulation-frame SpaceTimeField.
SpaceTimeField windowed_transform(const TimeSeries& u, int k, double t_k);

/// sup over t_k of the X_k norm of the windowed transform (F_k), or of the
/// transform times (tau - omega + i 2^k)^{-1} (N_k). The sup runs over a grid
/// of spacing 2^{-k}/4 covering every window that meets the samples.
WindowedNorm fk_norm(const TimeSeries& u, int k);
WindowedNorm nk_norm(const TimeSeries& u, int k);

/// E^s(T): ||P_{<=0} u(0)||^2 + sum_{k>=1} sup_{t <= T} 2^{2sk} ||P_k u(t)||^2.
double es_norm(const Trajectory& traj, double s, double T);

/// F^s / N^s: l^2 over k of 2^{sk} F_k (N_k) norms of P_k u, plus the P_{<=0} piece.
double fs_norm(const TimeSeries& u, double s);
double ns_norm(const TimeSeries& u, double s);

struct NormReport {
  std::string name;
  std::map<std::string, double> parameters;
  double value = 0.0;
  std::string note;

  std::string to_json_line() const;
};

}  // namespace kpi
