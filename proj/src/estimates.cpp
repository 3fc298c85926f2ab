#include "kpi/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <tuple>

#include "kpi/fft.hpp"
#include "kpi/solver.hpp"
#include "kpi/spectral.hpp"
#include "kpi/rng.hpp"

namespace kpi {

namespace {

constexpr const char* kIdNames[] = {"L3Z_A", "L3Z_B1", "L3Z_B2", "HILOW_RED", "PXK1", "PXK3", "TRI_A", "TRI_B"};
constexpr const char* kFamilyNames[] = {"cell_indicator", "random_nonneg", "gaussian_bump", "tensor"};

[[noreturn]] void violated(EstimateId id, const std::string& clause) {
  throw HypothesisError(to_string(id) + " hypothesis violated: " + clause);
}

}  // namespace

std::string to_string(EstimateId id) { return kIdNames[static_cast<int>(id)]; }

EstimateId estimate_from_string(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kIdNames[i]) return static_cast<EstimateId>(i);
  throw ContractError("unknown estimate id '" + name + "'");
}

std::string to_string(FunctionFamily family) { return kFamilyNames[static_cast<int>(family)]; }

FunctionFamily family_from_string(const std::string& name) {
  for (int i = 0; i < 4; ++i)
    if (name == kFamilyNames[i]) return static_cast<FunctionFamily>(i);
  throw ContractError("unknown function family '" + name + "'");
}

int DyadicParams::value(std::size_t i) const {
  const int v[6] = {k1, k2, k3, j1, j2, j3};
  if (i >= 6) throw ContractError("parameter index out of range");
  return v[i];
}

bool l3z_b1_branch(const DyadicParams& p, const RegimeScale& regime) {
  const int jmax = std::max({p.j1, p.j2, p.j3});
  return jmax <= p.k1 + p.k2 + p.k3 - regime.g2;
}

void check_hypotheses(EstimateId id, const DyadicParams& p, const RegimeScale& r) {
  const auto nonneg_j = [&](std::initializer_list<int> js) {
    for (int j : js)
      if (j < 0) violated(id, "j_i >= 0");
  };
  switch (id) {
    case EstimateId::L3Z_A:
      nonneg_j({p.j1, p.j2, p.j3});
      return;
    case EstimateId::L3Z_B1:
    case EstimateId::L3Z_B2:
      nonneg_j({p.j1, p.j2, p.j3});
      if (p.k2 < r.g2) violated(id, "k2 >= " + std::to_string(r.g2));
      if (std::abs(p.k2 - p.k3) > r.g0) violated(id, "|k2 - k3| <= " + std::to_string(r.g0));
      if (p.k1 > p.k2 - r.g1) violated(id, "k1 <= k2 - " + std::to_string(r.g1));
      if (id == EstimateId::L3Z_B1 && !l3z_b1_branch(p, r)) {
        violated(id, "j_max <= k1 + k2 + k3 - " + std::to_string(r.g2));
      }
      if (id == EstimateId::L3Z_B2 && l3z_b1_branch(p, r)) {
        violated(id, "j_max > k1 + k2 + k3 - " + std::to_string(r.g2) + " (ties belong to L3Z_B1)");
      }
      return;
    case EstimateId::HILOW_RED:
      if (p.k3 < r.g2) violated(id, "k3 >= " + std::to_string(r.g2));
      if (std::abs(p.k2 - p.k3) > r.g0) violated(id, "|k2 - k3| <= " + std::to_string(r.g0));
      if (p.k1 < 0 || p.k1 > p.k2 - r.g1) violated(id, "0 <= k1 <= k2 - " + std::to_string(r.g1));
      if (p.j1 < p.k3 || p.j2 < p.k3) violated(id, "j_i >= k3");
      return;
    case EstimateId::PXK1:
      if (p.k1 < 0) violated(id, "k >= 0");
      nonneg_j({p.j1});
      return;
    case EstimateId::PXK3:
      if (p.k1 < 0) violated(id, "k >= 0");
      if (p.k2 < 0) violated(id, "l >= 0");
      nonneg_j({p.j1});
      return;
    case EstimateId::TRI_A: {
      if (p.k1 < 0 || p.k2 < 0 || p.k3 < 0) violated(id, "k_i >= 0");
      const int kmin = std::min({p.k1, p.k2, p.k3});
      const int kmax = std::max({p.k1, p.k2, p.k3});
      if (kmin > kmax - r.g0) violated(id, "k_min <= k_max - " + std::to_string(r.g0));
      return;
    }
    case EstimateId::TRI_B:
      if (p.k1 < 0 || p.k1 > p.k2 - r.g1) violated(id, "0 <= k1 <= k - " + std::to_string(r.g1));
      return;
  }
}

// ---------------------------------------------------------------------------
// Sample functions

std::array<double, 3> Frame::point(double y0, double y1, double y2) const noexcept {
  std::array<double, 3> x = origin;
  for (int r = 0; r < 3; ++r) x[r] += map[3 * r] * y0 + map[3 * r + 1] * y1 + map[3 * r + 2] * y2;
  return x;
}

double Frame::det() const noexcept {
  const auto& m = map;
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
}

bool Frame::is_identity() const noexcept { return map == Frame{}.map && origin == Frame{}.origin; }

SpaceTimeField sample_region_function(const ModulationRegion& region, FunctionFamily family, std::uint64_t seed,
                                      const FrequencyLattice& lat, const PatchWindow& patch, const Frame& frame) {
  if (patch.n_xi == 0 || patch.n_mu == 0) throw ContractError("empty patch");
  if (!(lat.d_xi > 0.0 && lat.d_mu > 0.0 && lat.d_tau > 0.0)) throw ContractError("lattice spacings must be positive");
  if (!(std::abs(frame.det()) > 0.0)) throw ContractError("degenerate frame");
  const LatticeAxis xi{lat.d_xi, patch.xi_first, patch.n_xi};
  const LatticeAxis mu{lat.d_mu, patch.mu_first, patch.n_mu};
  const double band = std::ldexp(1.5, region.j);
  LatticeAxis tau{lat.d_tau, patch.tau_first, patch.n_tau};
  if (patch.n_tau == 0) {
    if (!frame.is_identity()) throw ContractError("a sheared frame needs an explicit tau window");
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t a = 0; a < patch.n_xi; ++a) {
      if (!region.contains_frequency(xi.value(a))) continue;
      for (std::size_t b = 0; b < patch.n_mu; ++b) {
        const double o = omega(xi.value(a), mu.value(b), region.mu_sign);
        lo = std::min(lo, o);
        hi = std::max(hi, o);
      }
    }
    if (!(lo <= hi)) throw ContractError("empty region on grid: no patch column lies in the frequency shell");
    const long t_first = static_cast<long>(std::floor((lo - band) / lat.d_tau));
    const long t_last = static_cast<long>(std::ceil((hi + band) / lat.d_tau));
    tau = LatticeAxis{lat.d_tau, t_first, static_cast<std::size_t>(t_last - t_first + 1)};
  }
  SpaceTimeField f(xi, mu, tau);

  std::vector<std::size_t> support;
  std::vector<double> sigma;
  for (std::size_t a = 0; a < xi.count; ++a)
    for (std::size_t b = 0; b < mu.count; ++b)
      for (std::size_t c = 0; c < tau.count; ++c) {
        const auto x = frame.point(xi.value(a), mu.value(b), tau.value(c));
        if (!region.contains(x[0], x[1], x[2])) continue;
        support.push_back(f.index(a, b, c));
        sigma.push_back(x[2] - omega(x[0], x[1], region.mu_sign));
      }
  if (support.empty()) throw ContractError("empty region on grid: no patch cell lies in the region");

  detail::Rng rng(seed);
  auto values = f.values();
  switch (family) {
    case FunctionFamily::cell_indicator:
      values[support[rng.below(support.size())]] = 1.0;
      break;
    case FunctionFamily::random_nonneg:
      for (std::size_t i : support) values[i] = rng.uniform();
      break;
    case FunctionFamily::gaussian_bump: {
      const double xc = rng.uniform() * static_cast<double>(xi.count - 1);
      const double mc = rng.uniform() * static_cast<double>(mu.count - 1);
      const double sc = (2.0 * rng.uniform() - 1.0) * band;
      const double wx = 0.25 + rng.uniform() * static_cast<double>(xi.count);
      const double wm = 0.25 + rng.uniform() * static_cast<double>(mu.count);
      const double ws = band * (0.1 + rng.uniform());
      for (std::size_t s = 0; s < support.size(); ++s) {
        const std::size_t i = support[s];
        const double da = (static_cast<double>(i / (mu.count * tau.count)) - xc) / wx;
        const double db = (static_cast<double>((i / tau.count) % mu.count) - mc) / wm;
        const double ds = (sigma[s] - sc) / ws;
        values[i] = std::exp(-(da * da + db * db + ds * ds));
      }
      break;
    }
    case FunctionFamily::tensor: {
      std::vector<double> fa(xi.count), fb(mu.count), fc(tau.count);
      for (auto& v : fa) v = rng.uniform();
      for (auto& v : fb) v = rng.uniform();
      for (auto& v : fc) v = rng.uniform();
      for (std::size_t i : support) {
        values[i] = fa[i / (mu.count * tau.count)] * fb[(i / tau.count) % mu.count] * fc[i % tau.count];
      }
      break;
    }
  }
  const double n = f.l2_norm() * std::sqrt(std::abs(frame.det()));
  if (!(n > 0.0)) throw ContractError("sampled function vanished on its support");
  for (auto& v : values) v /= n;
  return f;
}

// ---------------------------------------------------------------------------
// Convolution and trilinear form

namespace {

std::size_t fft_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t a = 1; a <= best; a *= 2)
    for (std::size_t b = a; b <= best; b *= 3)
      for (std::size_t c = b; c <= best; c *= 5)
        if (c >= n && c < best) best = c;
  return best;
}

void require_plain_lattice(const SpaceTimeField& f, const SpaceTimeField& g) {
  if (f.has_tau_shift() || g.has_tau_shift()) throw ContractError("lattice convolution needs unshifted tau axes");
  if (f.xi().spacing != g.xi().spacing || f.mu().spacing != g.mu().spacing || f.tau().spacing != g.tau().spacing) {
    throw ContractError("grid mismatch: fields do not share lattice spacings");
  }
}

}  // namespace

SpaceTimeField lattice_convolution(const SpaceTimeField& f1, const SpaceTimeField& f2) {
  require_plain_lattice(f1, f2);
  const auto out_axis = [](const LatticeAxis& a, const LatticeAxis& b) {
    return LatticeAxis{a.spacing, a.first + b.first, a.count + b.count - 1};
  };
  const LatticeAxis xi = out_axis(f1.xi(), f2.xi());
  const LatticeAxis mu = out_axis(f1.mu(), f2.mu());
  const LatticeAxis tau = out_axis(f1.tau(), f2.tau());
  const std::size_t n0 = fft_size(xi.count), n1 = fft_size(mu.count), n2 = fft_size(tau.count);
  auto& fft = cached_complex_fft({static_cast<int>(n0), static_cast<int>(n1), static_cast<int>(n2)});
  const auto load = [&](const SpaceTimeField& f, std::vector<Complex>& buf) {
    buf.assign(n0 * n1 * n2, Complex{});
    for (std::size_t a = 0; a < f.xi().count; ++a)
      for (std::size_t b = 0; b < f.mu().count; ++b)
        for (std::size_t c = 0; c < f.tau().count; ++c) buf[(a * n1 + b) * n2 + c] = f(a, b, c);
  };
  std::vector<Complex> a, b;
  load(f1, a);
  load(f2, b);
  fft.execute(a, -1);
  fft.execute(b, -1);
  const double scale = f1.cell_volume() / static_cast<double>(n0 * n1 * n2);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i] * scale;
  fft.execute(a, +1);
  SpaceTimeField out(xi, mu, tau);
  for (std::size_t i = 0; i < xi.count; ++i)
    for (std::size_t j = 0; j < mu.count; ++j)
      for (std::size_t c = 0; c < tau.count; ++c) out(i, j, c) = a[(i * n1 + j) * n2 + c];
  return out;
}

double trilinear_form(const SpaceTimeField& f1, const SpaceTimeField& f2, const SpaceTimeField& f3) {
  require_plain_lattice(f1, f3);
  for (const auto* f : {&f1, &f2, &f3})
    for (auto v : f->values())
      if (v.imag() != 0.0 || v.real() < 0.0) throw ContractError("trilinear_form: inputs must be nonnegative");
  const SpaceTimeField g = lattice_convolution(f1, f2);
  const auto overlap = [](const LatticeAxis& a, const LatticeAxis& b, long& lo, long& hi) {
    lo = std::max(a.first, b.first);
    hi = std::min(a.first + static_cast<long>(a.count), b.first + static_cast<long>(b.count));
  };
  long x0, x1, m0, m1, t0, t1;
  overlap(g.xi(), f3.xi(), x0, x1);
  overlap(g.mu(), f3.mu(), m0, m1);
  overlap(g.tau(), f3.tau(), t0, t1);
  double s = 0.0;
  for (long x = x0; x < x1; ++x)
    for (long m = m0; m < m1; ++m)
      for (long t = t0; t < t1; ++t) {
        const Complex gv = g(x - g.xi().first, m - g.mu().first, t - g.tau().first);
        s += gv.real() * f3(x - f3.xi().first, m - f3.mu().first, t - f3.tau().first).real();
      }
  return std::max(0.0, s * f3.cell_volume());
}

// ---------------------------------------------------------------------------
// Estimates

namespace {

ModulationRegion region_of(int k, int j, bool low, double mu_sign) {
  return ModulationRegion{k, j, low, true, mu_sign};
}

const Frame& frame_of(const EstimateInput& in, std::size_t i) {
  static const Frame identity;
  return in.frames.empty() ? identity : in.frames[i];
}

void require_frames(const EstimateInput& in, bool composed) {
  if (in.frames.empty()) return;
  if (in.frames.size() != in.fields.size()) throw ContractError("one frame per field required");
  for (const auto& f : in.frames)
    if (f.map != in.frames[0].map) throw ContractError("frames must share their linear part");
  if (!(std::abs(in.frames[0].det()) > 0.0)) throw ContractError("degenerate frame");
  if (composed && in.frames.size() == 3) {
    for (int r = 0; r < 3; ++r)
      if (in.frames[0].origin[r] + in.frames[1].origin[r] != in.frames[2].origin[r]) {
        throw ContractError("frame origins must satisfy origin1 + origin2 = origin3");
      }
  }
}

void require_support(const SpaceTimeField& f, const Frame& frame, const ModulationRegion& r, int which) {
  for (std::size_t a = 0; a < f.xi().count; ++a)
    for (std::size_t b = 0; b < f.mu().count; ++b)
      for (std::size_t c = 0; c < f.tau().count; ++c) {
        if (f(a, b, c) == Complex{}) continue;
        const auto x = frame.point(f.xi().value(a), f.mu().value(b), f.tau_value(a, b, c));
        if (!r.contains(x[0], x[1], x[2])) {
          throw ContractError("f" + std::to_string(which) + " is not supported in D_{" + std::to_string(r.k) + ",<=" +
                              std::to_string(r.j) + "}");
        }
      }
}

double tau_integral_norm(const SpaceTimeField& f) {
  double s = 0.0;
  for (std::size_t a = 0; a < f.xi().count; ++a)
    for (std::size_t b = 0; b < f.mu().count; ++b) {
      double col = 0.0;
      for (std::size_t c = 0; c < f.tau().count; ++c) col += std::abs(f(a, b, c));
      col *= f.tau().spacing;
      s += col * col;
    }
  return std::sqrt(s * f.xi().spacing * f.mu().spacing);
}

// F[gamma(2^l (t - t0)) F^{-1} f] with gamma(t) = exp(-t^2 / 2), as a tau convolution.
SpaceTimeField time_localize(const SpaceTimeField& f, int l, double t0) {
  const double width = std::ldexp(1.0, l);
  const double dt = f.tau().spacing;
  const long ext = static_cast<long>(std::ceil(9.0 * width / dt));
  const LatticeAxis tau{dt, f.tau().first - ext, f.tau().count + 2 * static_cast<std::size_t>(ext)};
  SpaceTimeField out(f.xi(), f.mu(), tau);
  const long n_k = 2 * ext + static_cast<long>(f.tau().count);
  std::vector<Complex> kernel(static_cast<std::size_t>(2 * n_k + 1));
  // (1/2pi) 2^{-l} sqrt(2 pi) exp(-s^2 / 2^{2l+1}) e^{-i s t0} dtau
  const double amp = dt / (width * std::sqrt(2.0 * std::numbers::pi));
  for (long q = -n_k; q <= n_k; ++q) {
    const double s = dt * static_cast<double>(q);
    kernel[static_cast<std::size_t>(q + n_k)] = amp * std::exp(-0.5 * (s / width) * (s / width)) * std::polar(1.0, -s * t0);
  }
  for (std::size_t a = 0; a < f.xi().count; ++a)
    for (std::size_t b = 0; b < f.mu().count; ++b) {
      bool any = false;
      for (std::size_t c = 0; c < f.tau().count; ++c) any = any || f(a, b, c) != Complex{};
      if (!any) continue;
      for (std::size_t c = 0; c < tau.count; ++c) {
        const long tc = tau.first + static_cast<long>(c);
        Complex s = 0.0;
        for (std::size_t cc = 0; cc < f.tau().count; ++cc) {
          const Complex v = f(a, b, cc);
          if (v == Complex{}) continue;
          s += kernel[static_cast<std::size_t>(tc - (f.tau().first + static_cast<long>(cc)) + n_k)] * v;
        }
        out(a, b, c) = s;
      }
    }
  return out;
}

struct HilowResult {
  double value = 0.0;
  double tail = 0.0;
};

// g lives on the y-lattice of `frame`; the x-side density is |det L| g(y) and
// each cell carries x-volume |det L| dV_y.
HilowResult hilow_sum(const SpaceTimeField& g, const Frame& frame, int k3, double mu_sign) {
  const DyadicShell shell{k3, false};
  const double jac = std::abs(frame.det());
  const double dv = g.cell_volume() * jac * jac * jac;
  std::vector<double> level;  // level[i]: mass first captured at j3 = k3 + i
  double total = 0.0;
  for (std::size_t a = 0; a < g.xi().count; ++a)
    for (std::size_t b = 0; b < g.mu().count; ++b)
      for (std::size_t c = 0; c < g.tau().count; ++c) {
        const double m = std::norm(g(a, b, c)) * dv;
        if (m == 0.0) continue;
        const auto x = frame.point(g.xi().value(a), g.mu().value(b), g.tau().value(c));
        if (!shell.contains(x[0])) continue;
        const double s = std::abs(x[2] - omega(x[0], x[1], mu_sign));
        int j = k3;
        while (s >= std::ldexp(1.5, j)) ++j;
        const auto i = static_cast<std::size_t>(j - k3);
        if (level.size() <= i) level.resize(i + 1, 0.0);
        level[i] += m;
        total += m;
      }
  HilowResult r;
  if (total == 0.0) return r;
  double cum = 0.0;
  for (std::size_t i = 0; i < level.size(); ++i) {
    cum += level[i];
    r.value += std::ldexp(1.0, k3) * std::exp2(-0.5 * (k3 + static_cast<double>(i))) * std::sqrt(cum);
  }
  // Every j3 past the last level sees the full mass: geometric tail in closed form.
  const double j_next = k3 + static_cast<double>(level.size());
  r.tail = std::ldexp(1.0, k3) * std::sqrt(total) * std::exp2(-0.5 * j_next) / (1.0 - std::sqrt(0.5));
  r.value += r.tail;
  return r;
}

}  // namespace

EstimateSample check_estimate(EstimateId id, const DyadicParams& p, const EstimateInput& in, const RegimeScale& regime,
                              std::uint64_t seed) {
  check_hypotheses(id, p, regime);
  EstimateSample s;
  s.id = id;
  s.params = p;
  s.seed = seed;
  const auto need = [&](std::size_t n) {
    if (in.fields.size() != n) {
      throw ContractError(to_string(id) + " expects " + std::to_string(n) + " fields, got " +
                          std::to_string(in.fields.size()));
    }
  };
  const double ms = in.mu_sign;
  switch (id) {
    case EstimateId::L3Z_A:
    case EstimateId::L3Z_B1:
    case EstimateId::L3Z_B2: {
      need(3);
      require_frames(in, true);
      const double jac = std::abs(frame_of(in, 0).det());
      const int ks[3] = {p.k1, p.k2, p.k3};
      const int js[3] = {p.j1, p.j2, p.j3};
      double norms = 1.0;
      for (std::size_t i = 0; i < 3; ++i) {
        require_support(in.fields[i], frame_of(in, i), region_of(ks[i], js[i], false, ms), static_cast<int>(i) + 1);
        norms *= in.fields[i].l2_norm() * std::sqrt(jac);
      }
      s.lhs = jac * jac * trilinear_form(in.fields[0], in.fields[1], in.fields[2]);
      const double jsum = p.j1 + p.j2 + p.j3;
      const double jmax = std::max({p.j1, p.j2, p.j3});
      const double ksum = p.k1 + p.k2 + p.k3;
      if (id == EstimateId::L3Z_A) {
        s.rhs = std::exp2(0.5 * jsum) * std::min(std::exp2(-0.5 * ksum), std::exp2(-0.5 * jmax)) * norms;
      } else if (id == EstimateId::L3Z_B1) {
        s.rhs = std::exp2(0.5 * (p.j1 + p.j2)) * std::exp2(-0.5 * p.k3) * std::exp2(0.5 * p.k1) * norms;
      } else {
        s.rhs = std::exp2(0.5 * (p.j1 + p.j2)) * std::exp2(0.25 * jmax) * std::exp2(-1.0 * p.k3) *
                std::exp2(0.25 * p.k1) * norms;
      }
      break;
    }
    case EstimateId::HILOW_RED: {
      need(2);
      require_frames(in, false);
      const double jac = std::abs(frame_of(in, 0).det());
      require_support(in.fields[0], frame_of(in, 0), region_of(p.k1, p.j1, p.k1 == 0, ms), 1);
      require_support(in.fields[1], frame_of(in, 1), region_of(p.k2, p.j2, false, ms), 2);
      Frame out = frame_of(in, 0);
      for (int r = 0; r < 3; ++r) out.origin[r] += frame_of(in, 1).origin[r];
      const auto h = hilow_sum(lattice_convolution(in.fields[0], in.fields[1]), out, p.k3, ms);
      s.lhs = h.value;
      s.tail = h.tail;
      s.rhs = (1.0 + p.k1) * std::exp2(-0.5 * p.k1) * std::exp2(0.5 * (p.j1 + p.j2)) * in.fields[0].l2_norm() *
              in.fields[1].l2_norm() * jac;
      break;
    }
    case EstimateId::PXK1:
    case EstimateId::PXK3:
      need(1);
      if (!frame_of(in, 0).is_identity()) throw ContractError(to_string(id) + " needs an axis-aligned field");
      if (id == EstimateId::PXK1) {
        s.lhs = tau_integral_norm(in.fields[0]);
      } else {
        s.lhs = xk_norm(time_localize(in.fields[0], p.k2, in.t0), p.k1, ms).value;
      }
      s.rhs = xk_norm(in.fields[0], p.k1, ms).value;
      break;
    case EstimateId::TRI_A:
    case EstimateId::TRI_B:
      throw ContractError(to_string(id) + " is evaluated on trajectories by solution_trilinear");
  }
  if (!(s.lhs >= 0.0) || !(s.rhs >= 0.0) || !std::isfinite(s.lhs) || !std::isfinite(s.rhs)) {
    throw NumericalError(to_string(id) + ": non-finite estimate sides");
  }
  s.ratio = s.rhs > 0.0 ? s.lhs / s.rhs : 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Random near-resonant configurations

namespace {

struct Mode {
  double xi = 0.0, mu = 0.0, tau = 0.0;
};

double draw_in_shell(int k, bool low, detail::Rng& rng) {
  const double lo = low ? 0.0 : std::ldexp(0.75, k);
  const double hi = std::ldexp(1.5, k);
  double a = lo + (hi - lo) * rng.uniform();
  if (a == 0.0) a = 0.5 * hi;
  return rng.uniform() < 0.5 ? -a : a;
}

// xi1 + xi2 = xi3 in the given shells with slopes putting the resonance
// function omega(z3) - omega(z1) - omega(z2)
//   = (xi1 xi2 / xi3) (3 xi3^2 - mu_sign (mu1/xi1 - mu2/xi2)^2)
// at sigma1 + sigma2 - sigma3, so that tau1 + tau2 = tau3 with each
// modulation tau_i - omega(z_i) = sigma_i.
bool draw_triple(const int ks[3], const bool low[3], const double sigma[3], double mu_sign, detail::Rng& rng,
                 Mode out[3]) {
  const double target = sigma[0] + sigma[1] - sigma[2];
  for (int attempt = 0; attempt < 4000; ++attempt) {
    const double x1 = draw_in_shell(ks[0], low[0], rng);
    const double x3 = draw_in_shell(ks[2], low[2], rng);
    const double x2 = x3 - x1;
    if (!DyadicShell{ks[1], low[1]}.contains(x2)) continue;
    const double c = x1 * x2 / x3;
    const double q2 = (3.0 * c * x3 * x3 - target) / (mu_sign * c);
    if (!(q2 >= 0.0)) continue;
    const double q = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::sqrt(q2);
    const double mean = (2.0 * rng.uniform() - 1.0) * std::abs(x3);
    out[0] = {x1, (mean + 0.5 * q) * x1, 0.0};
    out[1] = {x2, (mean - 0.5 * q) * x2, 0.0};
    out[2] = {x1 + x2, out[0].mu + out[1].mu, 0.0};
    for (int i = 0; i < 2; ++i) out[i].tau = omega(out[i].xi, out[i].mu, mu_sign) + sigma[i];
    out[2].tau = out[0].tau + out[1].tau;
    return true;
  }
  return false;
}

FrequencyLattice lattice_for(const Mode* modes, std::size_t n, int jmin, int kmin, double mu_sign) {
  FrequencyLattice lat;
  lat.d_tau = std::ldexp(0.5, jmin);
  double gx = 0.0, gm = 0.0, xmin = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = modes[i].xi, m = modes[i].mu;
    gx = std::max(gx, std::abs(3.0 * x * x - mu_sign * m * m / (x * x)));
    gm = std::max(gm, std::abs(2.0 * mu_sign * m / x));
    xmin = std::min(xmin, std::abs(x));
  }
  const double dx_shell = std::ldexp(1.0, kmin) / 32.0;
  lat.d_xi = std::min(dx_shell, lat.d_tau / std::max(gx, 1e-300));
  lat.d_mu = std::min(std::sqrt(lat.d_tau * xmin), lat.d_tau / std::max(gm, 1e-300));
  return lat;
}

// Box of up to nmax^2 columns around m; with a tau centre the tau window is
// capped at 4 nmax cells, otherwise it spans the whole modulation band.
PatchWindow patch_around(const Mode& m, const FrequencyLattice& lat, detail::Rng& rng, std::size_t nmax,
                         bool tau_window = false) {
  PatchWindow p;
  p.n_xi = 1 + rng.below(nmax);
  p.n_mu = 1 + rng.below(nmax);
  const long cx = std::lround(m.xi / lat.d_xi);
  const long cm = std::lround(m.mu / lat.d_mu);
  p.xi_first = cx - static_cast<long>(rng.below(p.n_xi));
  p.mu_first = cm - static_cast<long>(rng.below(p.n_mu));
  if (tau_window) {
    p.n_tau = 1 + rng.below(4 * nmax);
    p.tau_first = std::lround(m.tau / lat.d_tau) - static_cast<long>(rng.below(p.n_tau));
  }
  return p;
}

// Frame whose unit cube is the parallelepiped |N_i . (x - z)| <= delta_i cut
// out by the tangent slabs of the three surfaces; returns false when the
// normals are (numerically) dependent.
bool transversal_frame(const Mode m[3], const double delta[3], double mu_sign, std::array<double, 9>& map) {
  double n[9];
  for (int i = 0; i < 3; ++i) {
    const double x = m[i].xi, v = m[i].mu / m[i].xi;
    n[3 * i] = 3.0 * x * x - mu_sign * v * v;
    n[3 * i + 1] = 2.0 * mu_sign * v;
    n[3 * i + 2] = -1.0;
  }
  const double det = n[0] * (n[4] * n[8] - n[5] * n[7]) - n[1] * (n[3] * n[8] - n[5] * n[6]) +
                     n[2] * (n[3] * n[7] - n[4] * n[6]);
  double scale = 1.0;
  for (int i = 0; i < 3; ++i) scale *= std::hypot(n[3 * i], n[3 * i + 1], n[3 * i + 2]);
  if (!(std::abs(det) > 1e-9 * scale)) return false;
  // inverse by cofactors, columns scaled by delta
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int r1 = (c + 1) % 3, r2 = (c + 2) % 3, c1 = (r + 1) % 3, c2 = (r + 2) % 3;
      map[3 * r + c] = (n[3 * r1 + c1] * n[3 * r2 + c2] - n[3 * r1 + c2] * n[3 * r2 + c1]) / det * delta[c];
    }
  return true;
}

constexpr std::size_t kPatchCells = 12;
constexpr int kDrawAttempts = 64;

EstimateInput draw_convolution_input(EstimateId id, const DyadicParams& p, FunctionFamily family, detail::Rng& rng) {
  const double ms = 1.0;
  const bool hilow = id == EstimateId::HILOW_RED;
  const int ks[3] = {p.k1, p.k2, p.k3};
  const bool low[3] = {hilow && p.k1 == 0, false, false};
  const int js[3] = {p.j1, p.j2, hilow ? p.k3 : p.j3};
  const int jmin = std::min({js[0], js[1], js[2]});
  const std::size_t nf = hilow ? 2 : 3;
  const double band[3] = {std::ldexp(1.5, js[0]), std::ldexp(1.5, js[1]), std::ldexp(1.5, js[2])};
  for (int attempt = 0; attempt < kDrawAttempts; ++attempt) {
    double sigma[3];
    for (int i = 0; i < 3; ++i) sigma[i] = (2.0 * rng.uniform() - 1.0) * 0.9 * band[i];
    Mode modes[3];
    if (!draw_triple(ks, low, sigma, ms, rng, modes)) {
      // No triple xi1 + xi2 = xi3 exists in these shells and the form
      // vanishes identically; evaluate it on unrelated patches.
      for (int i = 0; i < 3; ++i) {
        modes[i].xi = draw_in_shell(ks[i], low[i], rng);
        modes[i].mu = 0.0;
        modes[i].tau = omega(modes[i].xi, 0.0, ms);
      }
      const FrequencyLattice lat = lattice_for(modes, 3, jmin, std::min({ks[0], ks[1], ks[2]}), ms);
      EstimateInput in;
      for (std::size_t i = 0; i < nf; ++i) {
        in.fields.push_back(sample_region_function(region_of(ks[i], js[i], low[i], ms), family, rng.next(), lat,
                                                   patch_around(modes[i], lat, rng, 2, true)));
      }
      return in;
    }
    EstimateInput in;
    // One draw in four keeps axis-aligned patches; the rest use the
    // transversal frame, whose cube is the extremal shape for the form.
    std::array<double, 9> map{};
    // Slab widths at the own band or, every other draw, log-uniform between
    // the thinnest band and the own band.
    double delta[3];
    const bool spread = rng.below(2) == 0;
    for (int i = 0; i < 3; ++i) {
      const double level = spread ? jmin + (js[i] - jmin) * rng.uniform() : js[i];
      delta[i] = (0.25 + 0.75 * rng.uniform()) * std::exp2(level);
    }
    const bool sheared = rng.below(4) != 0 && transversal_frame(modes, delta, ms, map);
    try {
      if (sheared) {
        FrequencyLattice lat;
        const double m0 = 2 + static_cast<double>(rng.below(4));
        const double m1 = 2 + static_cast<double>(rng.below(4));
        const double m2 = 2 + static_cast<double>(rng.below(4));
        lat.d_xi = 1.0 / m0;
        lat.d_mu = 1.0 / m1;
        lat.d_tau = 1.0 / m2;
        for (std::size_t i = 0; i < nf; ++i) {
          const double reach = i == 2 ? 0.5 + 2.0 * rng.uniform() : 0.5 + rng.uniform();
          const auto half = [&](double m) { return std::max<long>(1, std::lround(reach * m)); };
          PatchWindow patch;
          patch.xi_first = -half(m0);
          patch.mu_first = -half(m1);
          patch.tau_first = -half(m2);
          patch.n_xi = static_cast<std::size_t>(2 * half(m0) + 1);
          patch.n_mu = static_cast<std::size_t>(2 * half(m1) + 1);
          patch.n_tau = static_cast<std::size_t>(2 * half(m2) + 1);
          Frame fr;
          fr.map = map;
          fr.origin = {modes[i].xi, modes[i].mu, modes[i].tau};
          if (i == 2) {
            for (int r = 0; r < 3; ++r) fr.origin[r] = in.frames[0].origin[r] + in.frames[1].origin[r];
          }
          in.fields.push_back(
              sample_region_function(region_of(ks[i], js[i], low[i], ms), family, rng.next(), lat, patch, fr));
          in.frames.push_back(fr);
        }
      } else {
        const FrequencyLattice lat = lattice_for(modes, 3, jmin, std::min({ks[0], ks[1], ks[2]}), ms);
        for (std::size_t i = 0; i < nf; ++i) {
          const auto patch = patch_around(modes[i], lat, rng, kPatchCells, true);
          in.fields.push_back(
              sample_region_function(region_of(ks[i], js[i], low[i], ms), family, rng.next(), lat, patch));
        }
      }
      return in;
    } catch (const ContractError&) {
      // a patch missed its region; draw again
    }
  }
  throw ContractError(to_string(id) + ": no admissible sample configuration found");
}

}  // namespace

EstimateInput draw_estimate_input(EstimateId id, const DyadicParams& p, FunctionFamily family, std::uint64_t seed,
                                  const RegimeScale& regime) {
  check_hypotheses(id, p, regime);
  detail::Rng rng(seed);
  const double ms = 1.0;
  switch (id) {
    case EstimateId::L3Z_A:
    case EstimateId::L3Z_B1:
    case EstimateId::L3Z_B2:
    case EstimateId::HILOW_RED:
      return draw_convolution_input(id, p, family, rng);
    case EstimateId::PXK1:
    case EstimateId::PXK3:
      for (int attempt = 0; attempt < kDrawAttempts; ++attempt) {
        EstimateInput in;
        Mode m;
        m.xi = draw_in_shell(p.k1, p.k1 == 0, rng);
        m.mu = (2.0 * rng.uniform() - 1.0) * std::abs(m.xi) * std::ldexp(1.0, p.k1);
        const FrequencyLattice lat = lattice_for(&m, 1, std::max(0, p.j1 - 1), p.k1, ms);
        const auto patch = patch_around(m, lat, rng, 6);
        in.t0 = (2.0 * rng.uniform() - 1.0) * std::ldexp(4.0, -p.k2);
        try {
          in.fields.push_back(
              sample_region_function(region_of(p.k1, p.j1, p.k1 == 0, ms), family, rng.next(), lat, patch));
          return in;
        } catch (const ContractError&) {
          // patch outside the shell; draw again
        }
      }
      throw ContractError(to_string(id) + ": no admissible sample configuration found");
    case EstimateId::TRI_A:
    case EstimateId::TRI_B:
      break;
  }
  throw ContractError(to_string(id) + " samples come from solver trajectories");
}

// ---------------------------------------------------------------------------
// Alternating ascent

namespace {

SpaceTimeField reflect(const SpaceTimeField& f) {
  const auto flip = [](const LatticeAxis& a) {
    return LatticeAxis{a.spacing, -(a.first + static_cast<long>(a.count) - 1), a.count};
  };
  SpaceTimeField out(flip(f.xi()), flip(f.mu()), flip(f.tau()));
  const std::size_t na = f.xi().count, nb = f.mu().count, nc = f.tau().count;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t c = 0; c < nc; ++c) out(na - 1 - a, nb - 1 - b, nc - 1 - c) = f(a, b, c);
  return out;
}

// Nonnegative part of src on the window of `like`, cut to the cells whose
// images lie in `region`, with unit x-side L2 norm. Returns false if nothing
// survives.
bool restrict_into(const SpaceTimeField& src, SpaceTimeField& like, const Frame& frame,
                   const ModulationRegion& region) {
  SpaceTimeField out(like.xi(), like.mu(), like.tau());
  const auto at = [&](const LatticeAxis& axis, const LatticeAxis& from, std::size_t i, long& j) {
    j = axis.first + static_cast<long>(i) - from.first;
    return j >= 0 && j < static_cast<long>(from.count);
  };
  for (std::size_t a = 0; a < out.xi().count; ++a)
    for (std::size_t b = 0; b < out.mu().count; ++b)
      for (std::size_t c = 0; c < out.tau().count; ++c) {
        long sa, sb, sc;
        if (!at(out.xi(), src.xi(), a, sa) || !at(out.mu(), src.mu(), b, sb) || !at(out.tau(), src.tau(), c, sc)) continue;
        const double v = src(static_cast<std::size_t>(sa), static_cast<std::size_t>(sb), static_cast<std::size_t>(sc)).real();
        if (!(v > 0.0)) continue;
        const auto x = frame.point(out.xi().value(a), out.mu().value(b), out.tau().value(c));
        if (region.contains(x[0], x[1], x[2])) out(a, b, c) = v;
      }
  const double n = out.l2_norm() * std::sqrt(std::abs(frame.det()));
  if (!(n > 0.0)) return false;
  for (auto& v : out.values()) v /= n;
  like = std::move(out);
  return true;
}

}  // namespace

EstimateInput ascend_estimate_input(EstimateId id, const DyadicParams& p, EstimateInput in, int steps) {
  if (steps <= 0) return in;
  const bool hilow = id == EstimateId::HILOW_RED;
  if (id != EstimateId::L3Z_A && id != EstimateId::L3Z_B1 && id != EstimateId::L3Z_B2 && !hilow) return in;
  const double ms = in.mu_sign;
  std::vector<Frame> frames = in.frames;
  if (frames.empty()) frames.assign(in.fields.size(), Frame{});
  const ModulationRegion r1 = region_of(p.k1, p.j1, hilow && p.k1 == 0, ms);
  const ModulationRegion r2 = region_of(p.k2, p.j2, false, ms);
  const ModulationRegion r3 = region_of(p.k3, hilow ? p.k3 : p.j3, false, ms);
  Frame f3 = frames[0];
  for (int r = 0; r < 3; ++r) f3.origin[r] = frames[0].origin[r] + frames[1].origin[r];
  SpaceTimeField g3 = hilow ? lattice_convolution(in.fields[0], in.fields[1]) : in.fields[2];
  if (hilow && !restrict_into(lattice_convolution(in.fields[0], in.fields[1]), g3, f3, r3)) return in;
  SpaceTimeField g1 = in.fields[0], g2 = in.fields[1];
  for (int s = 0; s < steps; ++s) {
    if (!restrict_into(lattice_convolution(g3, reflect(g2)), g1, frames[0], r1)) break;
    if (!restrict_into(lattice_convolution(g3, reflect(g1)), g2, frames[1], r2)) break;
    if (!restrict_into(lattice_convolution(g1, g2), g3, f3, r3)) break;
  }
  in.fields[0] = std::move(g1);
  in.fields[1] = std::move(g2);
  if (!hilow) in.fields[2] = std::move(g3);
  return in;
}

// ---------------------------------------------------------------------------
// Solution-level trilinear estimates

namespace {

std::vector<SpectralField2D> physical_frame(const TimeSeries& u, double t_max) {
  std::vector<SpectralField2D> out;
  for (std::size_t i = 0; i < u.samples.size(); ++i) {
    const double t = u.t0 + u.dt * static_cast<double>(i);
    if (t > t_max * (1.0 + 1e-12)) break;
    out.push_back(u.profile ? linear_propagate(u.samples[i], t, u.mu_sign) : u.samples[i]);
  }
  return out;
}

double trapezoid(const std::vector<double>& f, double dt) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dt;
}

SpectralField2D product(const SpectralField2D& a, const SpectralField2D& b) {
  const auto pa = to_physical(a);
  const auto pb = to_physical(b);
  std::vector<double> v(pa.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pa.values()[i] * pb.values()[i];
  return to_spectral(RealField2D(a.grid(), std::move(v)));
}

// Shells the data never reaches contribute 0 and impose no time-step limit.
double fk_of(const TimeSeries& u, int k, bool low) {
  const TimeSeries p = project_series(u, k, low ? ShellMode::le_k : ShellMode::exact_k);
  for (const auto& f : p.samples)
    if (f.l2_norm() > 0.0) return fk_norm(p, k).value;
  return 0.0;
}

// Per-trajectory memo of F_k values and projected physical frames, shared by
// all cells evaluated on the same series.
struct TrilinearCache {
  std::map<std::tuple<const TimeSeries*, int, bool>, double> fk;
  std::map<std::tuple<const TimeSeries*, int, bool>, std::vector<SpectralField2D>> frames;

  double f(const TimeSeries& u, int k, bool low) {
    const auto key = std::make_tuple(&u, k, low);
    auto it = fk.find(key);
    if (it == fk.end()) it = fk.emplace(key, fk_of(u, k, low)).first;
    return it->second;
  }
  const std::vector<SpectralField2D>& shell(const TimeSeries& u, int k, bool low, double t_max) {
    const auto key = std::make_tuple(&u, k, low);
    auto it = frames.find(key);
    if (it == frames.end()) {
      auto v = physical_frame(project_series(u, k, low ? ShellMode::le_k : ShellMode::exact_k), t_max);
      it = frames.emplace(key, std::move(v)).first;
    }
    return it->second;
  }
};

EstimateSample trilinear_cached(const std::vector<const TimeSeries*>& u, const DyadicParams& p,
                                TrilinearVariant variant, const RegimeScale& regime, TrilinearCache& cache) {
  const EstimateId id = variant == TrilinearVariant::TRI_A ? EstimateId::TRI_A : EstimateId::TRI_B;
  check_hypotheses(id, p, regime);
  const std::size_t want = variant == TrilinearVariant::TRI_A ? 3 : 2;
  if (u.size() != want) throw ContractError(to_string(id) + " expects " + std::to_string(want) + " series");
  const TimeSeries& u0 = *u[0];
  for (const TimeSeries* s : u) {
    if (s->samples.empty()) throw ContractError("empty time series");
    if (s->dt != u0.dt || s->t0 != u0.t0 || s->samples.size() != u0.samples.size() || !(s->grid() == u0.grid())) {
      throw ContractError("series must share one time grid and one spatial grid");
    }
  }
  const double t_end = u0.t_end();
  EstimateSample out;
  out.id = id;
  out.params = p;
  std::vector<double> integrand;
  if (variant == TrilinearVariant::TRI_A) {
    const int ks[3] = {p.k1, p.k2, p.k3};
    const auto& a = cache.shell(*u[0], ks[0], false, t_end);
    const auto& b = cache.shell(*u[1], ks[1], false, t_end);
    const auto& c = cache.shell(*u[2], ks[2], false, t_end);
    for (std::size_t t = 0; t < a.size(); ++t) integrand.push_back(inner_product(product(a[t], b[t]), c[t]));
    out.lhs = std::abs(trapezoid(integrand, u0.dt));
    const int kmin = std::min({p.k1, p.k2, p.k3});
    out.rhs = std::exp2(-0.5 * kmin);
    for (int i = 0; i < 3; ++i) out.rhs *= cache.f(*u[i], ks[i], false);
  } else {
    const int k = p.k2, k1 = p.k1;
    const auto full = physical_frame(u0, t_end);
    const auto& low = cache.shell(*u[1], k1, k1 == 0, t_end);
    const auto& pk = cache.shell(u0, k, false, t_end);
    for (std::size_t t = 0; t < full.size(); ++t) {
      const auto inner = project_shell(product(full[t], low[t]), k);
      integrand.push_back(inner_product(pk[t], dx(inner)));
    }
    out.lhs = std::abs(trapezoid(integrand, u0.dt));
    double sum = 0.0;
    for (int kk = std::max(0, k - regime.g1); kk <= k + regime.g1; ++kk) {
      const double f = cache.f(u0, kk, kk == 0);
      sum += f * f;
    }
    out.rhs = std::exp2(0.5 * k1) * cache.f(*u[1], k1, k1 == 0) * sum;
  }
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

}  // namespace

EstimateSample solution_trilinear(const std::vector<TimeSeries>& u, const DyadicParams& p, TrilinearVariant variant,
                                  const RegimeScale& regime) {
  std::vector<const TimeSeries*> ptr;
  for (const auto& s : u) ptr.push_back(&s);
  TrilinearCache cache;
  return trilinear_cached(ptr, p, variant, regime, cache);
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<DyadicParams> sweep_cells(const SweepConfig& c, std::vector<std::pair<DyadicParams, std::string>>* skipped) {
  std::vector<DyadicParams> cells;
  const auto admit = [&](const DyadicParams& p) {
    try {
      check_hypotheses(c.id, p, c.regime);
      cells.push_back(p);
    } catch (const HypothesisError& err) {
      if (skipped != nullptr) skipped->emplace_back(p, err.what());
    }
  };
  if (!c.cells.empty()) {
    for (const auto& p : c.cells) admit(p);
    return cells;
  }
  std::vector<std::vector<int>> r(6);
  for (int i = 0; i < 6; ++i) r[i] = c.ranges[i].empty() ? std::vector<int>{0} : c.ranges[i];
  for (int a : r[0])
    for (int b : r[1])
      for (int d : r[2])
        for (int e : r[3])
          for (int f : r[4])
            for (int g : r[5]) admit({a, b, d, e, f, g});
  return cells;
}

std::vector<double> regression_slopes(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  if (x.empty()) return {};
  const std::size_t cols = x.front().size();
  std::vector<double> out(cols, 0.0);
  const double n = static_cast<double>(y.size());
  if (y.size() < 2) return out;
  double ym = 0.0;
  for (double v : y) ym += v;
  ym /= n;
  for (std::size_t c = 0; c < cols; ++c) {
    double xm = 0.0;
    for (const auto& row : x) xm += row[c];
    xm /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      sxy += (x[i][c] - xm) * (y[i] - ym);
      sxx += (x[i][c] - xm) * (x[i][c] - xm);
    }
    out[c] = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return out;
}

namespace {

std::vector<TimeSeries> tri_trajectories(const SweepConfig& c, std::uint64_t seed, int kmax);

// Seeds depend on the cell parameters, not on the cell's position in a sweep.
std::uint64_t cell_key(const DyadicParams& p) {
  std::uint64_t h = 0x51ed270b27d1f3a5ULL;
  for (std::size_t i = 0; i < 6; ++i) h = detail::splitmix64(h ^ static_cast<std::uint64_t>(p.value(i) + 1024));
  return h;
}

void summarize(SweepReport& rep, const SweepConfig& c) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  bool varies[6] = {};
  for (const auto& cell : rep.cells) {
    rep.global_max = std::max(rep.global_max, cell.max_ratio);
    if (!(cell.max_ratio > 0.0)) continue;
    std::vector<double> row(6);
    for (std::size_t i = 0; i < 6; ++i) row[i] = cell.params.value(i);
    x.push_back(row);
    y.push_back(std::log2(cell.max_ratio));
  }
  for (std::size_t i = 0; i < 6; ++i)
    for (const auto& row : x) varies[i] = varies[i] || row[i] != x.front()[i];
  const auto slopes = regression_slopes(x, y);
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (!varies[i]) continue;
    rep.slopes[kParamNames[i]] = slopes[i];
    if (slopes[i] > c.slope_flag) rep.flagged.push_back(kParamNames[i]);
  }
}

}  // namespace

SweepReport run_sweep(const SweepConfig& c) {
  SweepReport rep;
  rep.id = c.id;
  const auto cells = sweep_cells(c, &rep.skipped);
  if (cells.empty()) return rep;
  const bool tri = c.id == EstimateId::TRI_A || c.id == EstimateId::TRI_B;
  std::vector<std::vector<EstimateSample>> per_cell(cells.size(), std::vector<EstimateSample>(c.samples_per_cell));

  int kmax = 0;
  for (const auto& p : cells) kmax = std::max({kmax, p.k1, p.k2, p.k3});

  const std::size_t threads = std::max<std::size_t>(1, c.threads);
  std::mutex err_mu;
  std::exception_ptr err;
  const auto work = [&](std::size_t worker) {
    try {
      if (tri) {
        for (std::size_t s = worker; s < c.samples_per_cell; s += threads) {
          const std::uint64_t seed = detail::mix_seed(c.seed, 0, s);
          const auto series = tri_trajectories(c, seed, kmax);
          const auto variant = c.id == EstimateId::TRI_A ? TrilinearVariant::TRI_A : TrilinearVariant::TRI_B;
          const std::vector<const TimeSeries*> args = variant == TrilinearVariant::TRI_A
                                                          ? std::vector<const TimeSeries*>(3, &series[0])
                                                          : std::vector<const TimeSeries*>{&series[0], &series[1]};
          TrilinearCache cache;
          for (std::size_t i = 0; i < cells.size(); ++i) {
            auto smp = trilinear_cached(args, cells[i], variant, c.regime, cache);
            smp.seed = seed;
            per_cell[i][s] = smp;
          }
        }
      } else {
        std::size_t task = 0;
        for (std::size_t i = 0; i < cells.size(); ++i)
          for (std::size_t s = 0; s < c.samples_per_cell; ++s, ++task) {
            if (task % threads != worker) continue;
            const std::uint64_t seed = detail::mix_seed(c.seed, cell_key(cells[i]), s);
            const auto in = ascend_estimate_input(
                c.id, cells[i], draw_estimate_input(c.id, cells[i], c.family, seed, c.regime), c.ascent_steps);
            per_cell[i][s] = check_estimate(c.id, cells[i], in, c.regime, seed);
          }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);

  for (std::size_t i = 0; i < cells.size(); ++i) {
    SweepCell cell;
    cell.params = cells[i];
    cell.samples = per_cell[i].size();
    double sum = 0.0;
    for (const auto& s : per_cell[i]) {
      cell.max_ratio = std::max(cell.max_ratio, s.ratio);
      sum += s.ratio;
      if (s.lhs > 0.0) cell.max_tail_fraction = std::max(cell.max_tail_fraction, s.tail / s.lhs);
      rep.samples.push_back(s);
    }
    cell.mean_ratio = cell.samples ? sum / static_cast<double>(cell.samples) : 0.0;
    rep.cells.push_back(cell);
  }
  summarize(rep, c);
  return rep;
}

namespace {

// Smooth random data band-limited in xi to the dealiased range, evolved by the
// solver; returns {u, v} profile series on a grid fine enough for shell kmax.
std::vector<TimeSeries> tri_trajectories(const SweepConfig& c, std::uint64_t seed, int kmax) {
  std::size_t nx = 16;
  while (static_cast<double>(nx) / 3.0 < std::ldexp(1.6, kmax)) nx *= 2;
  // highest shell meeting the dealiased band |xi| <= nx/3
  int k_time = 0;
  while (std::ldexp(0.625, k_time + 1) < static_cast<double>(nx) / 3.0) ++k_time;
  const Grid g(nx, 8, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  detail::Rng rng(seed);
  std::vector<TimeSeries> out;
  for (int which = 0; which < 2; ++which) {
    std::vector<Complex> coeff(g.size());
    SpectralField2D probe(g);
    for (int n = 1; n <= g.max_x_mode(); ++n) {
      for (int m = g.min_y_mode() + 1; m <= g.max_y_mode(); ++m) {
        if (!dealias_keep(g, n, m, 2.0 / 3.0)) continue;
        const double decay = std::pow(1.0 + static_cast<double>(n) * n, -0.55);
        const Complex z = decay * Complex(rng.normal(), rng.normal());
        coeff[probe.index(n, m)] = z;
        coeff[probe.index(-n, -m)] = std::conj(z);
      }
    }
    SpectralField2D phi(g, std::move(coeff));
    phi = (0.5 / phi.l2_norm()) * phi;
    SolverConfig cfg;
    cfg.t_end = c.tri_time;
    cfg.dt = std::min(c.tri_time, std::ldexp(0.25, -k_time));
    cfg.hs_orders = {};
    out.push_back(profile_series(evolve(phi, cfg)));
  }
  return out;
}

}  // namespace

std::string SweepReport::to_json() const {
  nlohmann::ordered_json j;
  j["estimate_id"] = to_string(id);
  j["global_max"] = global_max;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    nlohmann::ordered_json e;
    for (std::size_t i = 0; i < 6; ++i) e[kParamNames[i]] = c.params.value(i);
    e["samples"] = c.samples;
    e["max_ratio"] = c.max_ratio;
    e["mean_ratio"] = c.mean_ratio;
    e["max_tail_fraction"] = c.max_tail_fraction;
    cs.push_back(e);
  }
  j["cells"] = cs;
  nlohmann::ordered_json sl = nlohmann::ordered_json::object();
  for (const auto& [k, v] : slopes) sl[k] = v;
  j["slopes"] = sl;
  j["flagged"] = flagged;
  nlohmann::ordered_json sk = nlohmann::ordered_json::array();
  for (const auto& [p, why] : skipped) {
    nlohmann::ordered_json e;
    for (std::size_t i = 0; i < 6; ++i) e[kParamNames[i]] = p.value(i);
    e["reason"] = why;
    sk.push_back(e);
  }
  j["skipped"] = sk;
  return j.dump(2);
}

std::string csv_header() { return "estimate_id,k1,k2,k3,j1,j2,j3,seed,lhs,rhs,ratio"; }

std::string to_csv_row(const EstimateSample& s) {
  std::ostringstream o;
  o.precision(17);
  o << to_string(s.id) << ',' << s.params.k1 << ',' << s.params.k2 << ',' << s.params.k3 << ',' << s.params.j1 << ','
    << s.params.j2 << ',' << s.params.j3 << ',' << s.seed << ',' << s.lhs << ',' << s.rhs << ',' << s.ratio;
  return o.str();
}

}  // namespace kpi
