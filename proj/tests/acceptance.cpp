// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "kpi/bourgain.hpp"
#include "kpi/dyadic.hpp"
#include "kpi/estimates.hpp"
#include "kpi/solver.hpp"
#include "kpi/spectral.hpp"
#include "oracle_bump.hpp"

#ifndef KPI_CONFIG_DIR
#error "KPI_CONFIG_DIR must point at the shipped configs"
#endif

namespace fs = std::filesystem;
using namespace kpi;
using cli::Command;
using Json = nlohmann::json;

namespace {

constexpr double pi = 3.14159265358979323846;

const fs::path kConfigs = KPI_CONFIG_DIR;

const std::map<std::string, Command> kShipped = {
    {"continuity", Command::probe_continuity},
    {"energy", Command::probe_energy},
    {"existence_time", Command::probe_continuity},
    {"linear", Command::run},
    {"norms_single_mode", Command::norms},
    {"norms_trajectory", Command::norms},
    {"reference", Command::run},
    {"scaling", Command::scaling_check},
    {"smoke_l3z_a", Command::verify},
    {"sweep_suite", Command::verify},
    {"zero", Command::run},
};

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Runner {
  fs::path out;
  /// First-run directory and exit code of each shipped config already executed.
  std::map<std::string, std::pair<fs::path, int>> first_runs;

  int run(const std::string& name, const fs::path& dir) {
    cli::CommandOptions o;
    o.config = kConfigs / (name + ".toml");
    o.out = dir;
    o.threads = cli::threads_from_env();
    std::ostringstream err;
    const int rc = cli::execute(kShipped.at(name), o, err);
    if (rc != cli::kExitOk) std::cerr << name << ": " << err.str();
    return rc;
  }

  int first(const std::string& name) {
    const auto dir = out / name / "first";
    const int rc = run(name, dir);
    first_runs[name] = {dir, rc};
    return rc;
  }
};

// Criterion 1 -----------------------------------------------------------------

Outcome linear_exactness(Runner&) {
  const auto config = cli::Config::load(kConfigs / "linear.toml");
  const Grid g = cli::grid_from(config);
  SolverConfig cfg = cli::solver_from(config);
  const auto phi = cli::initial_data(config, g, cli::seed_from(config, std::nullopt));
  Outcome o;
  if (cfg.nonlinearity_on || cfg.t_end != 1.0 || g.nx() != 256 || g.ny() != 256) {
    o.summary = "linear.toml is not the nonlinearity-off 256x256, t = 1 setup";
    return o;
  }
  double worst = 0.0;
  double slowest = 0.0;
  for (auto integ : {Integrator::etdrk4, Integrator::if_rk4}) {
    cfg.integrator = integ;
    const Stopwatch sw;
    const auto traj = evolve(phi, cfg);
    slowest = std::max(slowest, sw.seconds());
    const auto& u = traj.back().field;
    const double t = traj.back().t;
    double num = 0.0, den = 0.0;
    for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n)
      for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) {
        const double xi = 2.0 * pi * n / g.lx();
        const double mu = 2.0 * pi * m / g.ly();
        const Complex c0 = phi.coeff()[phi.index(n, m)];
        const Complex expect = xi == 0.0 ? Complex(0.0) : c0 * std::polar(1.0, t * (xi * xi * xi + mu * mu / xi));
        num += std::norm(u.coeff()[u.index(n, m)] - expect);
        den += std::norm(expect);
      }
    const double rel = std::sqrt(num / den);
    worst = std::max(worst, rel);
    o.details.push_back(fmt("%s: relative error %.3e at t = %g", to_string(integ).c_str(), rel, t));
  }
  o.pass = worst <= 1e-10 && slowest < 10.0;
  o.summary = fmt("linear exactness: max relative error %.3e (<= 1e-10), slowest run %.2f s (< 10 s)", worst, slowest);
  return o;
}

// Criterion 2 -----------------------------------------------------------------

std::pair<double, double> max_drifts(const Trajectory& traj) {
  const auto& a = traj.snapshots.front();
  double dm = 0.0, de = 0.0;
  for (const auto& s : traj.snapshots) {
    dm = std::max(dm, std::abs(s.mass - a.mass) / std::abs(a.mass));
    de = std::max(de, std::abs(s.energy - a.energy) / std::abs(a.energy));
  }
  return {dm, de};
}

Outcome conservation(Runner& r) {
  Outcome o;
  const Stopwatch sw;
  const int rc = r.first("reference");
  const double t_ref = sw.seconds();
  if (rc != cli::kExitOk) {
    o.summary = fmt("conservation: reference run exited with %d", rc);
    return o;
  }
  const auto summary = Json::parse(slurp(r.first_runs["reference"].first / "summary.json"));
  const double dm = summary["max_mass_drift"];
  const double de = summary["max_energy_drift"];

  const auto config = cli::Config::load(kConfigs / "reference.toml");
  const Grid g = cli::grid_from(config);
  SolverConfig cfg = cli::solver_from(config);
  const auto phi = cli::initial_data(config, g, cli::seed_from(config, std::nullopt));
  const double dt = cfg.dt;
  cfg.dt /= 2.0;
  cfg.output_stride *= 2;
  const Stopwatch sw_half;
  const auto half = evolve(phi, cfg);
  const double t_half = sw_half.seconds();
  const auto [dm2, de2] = max_drifts(half);
  const double rm = dm / dm2, re = de / de2;
  const bool grid_ok = g.nx() == 256 && g.ny() == 256 && std::abs(g.lx() - 16 * pi) < 1e-12 &&
                       std::abs(g.ly() - 16 * pi) < 1e-12 && dt == 1e-4 && cfg.t_end == 1.0 && cfg.nonlinearity_on;
  o.details.push_back(fmt("dt = %g: mass drift %.3e, energy drift %.3e (%.1f s)", dt, dm, de, t_ref));
  o.details.push_back(fmt("dt = %g: mass drift %.3e, energy drift %.3e (%.1f s)", cfg.dt, dm2, de2, t_half));
  if (!grid_ok) o.details.push_back("reference.toml does not pin 256x256, 16pi box, dt = 1e-4, T = 1");
  const auto in_band = [](double x) { return x >= 8.0 && x <= 32.0; };
  o.pass = grid_ok && !half.blew_up && dm <= 1e-6 && de <= 1e-4 && in_band(rm) && in_band(re) && t_ref + t_half < 300.0;
  o.summary = fmt("conservation: drift M %.2e (<= 1e-6), E %.2e (<= 1e-4); halving dt shrinks M by %.1fx, E by %.1fx "
                  "(in [8, 32]); %.0f s (< 300 s)",
                  dm, de, rm, re, t_ref + t_half);
  return o;
}

// Criterion 3 -----------------------------------------------------------------

Outcome scaling(Runner& r) {
  Outcome o;
  const Stopwatch sw;
  const int rc = r.first("scaling");
  const double secs = sw.seconds();
  if (rc != cli::kExitOk) {
    o.summary = fmt("scaling invariance: scaling-check exited with %d", rc);
    return o;
  }
  const auto j = Json::parse(slurp(r.first_runs["scaling"].first / "scaling.json"));
  const double err = j["relative_error"];
  const double lambda = j["lambda"];
  o.pass = lambda == 2.0 && err <= 1e-8 && secs < 300.0;
  o.summary = fmt("scaling invariance: lambda = %g, relative H^{1,0} discrepancy %.3e (<= 1e-8), %.1f s (< 300 s)", lambda,
                  err, secs);
  return o;
}

// Criterion 4 -----------------------------------------------------------------

// Real trigonometric polynomial sum a cos(xi x + mu y) + b sin(xi x + mu y) over
// half-plane modes, plus a mean a0. Its norms are known in closed form.
struct TrigField {
  struct Mode {
    double xi, mu, a, b;
  };
  Grid grid;
  double a0 = 0.0;
  std::vector<Mode> modes;

  RealField2D physical() const {
    std::vector<double> v(grid.size(), a0);
    for (std::size_t i = 0; i < grid.nx(); ++i)
      for (std::size_t j = 0; j < grid.ny(); ++j) {
        const double x = grid.dx() * static_cast<double>(i), y = grid.dy() * static_cast<double>(j);
        double s = 0.0;
        for (const auto& m : modes) s += m.a * std::cos(m.xi * x + m.mu * y) + m.b * std::sin(m.xi * x + m.mu * y);
        v[i * grid.ny() + j] += s;
      }
    return {grid, std::move(v)};
  }

  /// Squared L2 norm of the multiplier w(|xi|) applied to the field.
  double weighted(const std::function<double(double)>& w) const {
    const double area = grid.lx() * grid.ly();
    double s = a0 * a0 * w(0.0) * w(0.0) * area;
    for (const auto& m : modes) s += w(std::abs(m.xi)) * w(std::abs(m.xi)) * 0.5 * (m.a * m.a + m.b * m.b) * area;
    return s;
  }
};

TrigField random_trig(const Grid& g, std::mt19937_64& rng, bool zero_fiber) {
  std::normal_distribution<double> nd;
  TrigField f{g, zero_fiber ? nd(rng) : 0.0, {}};
  const int hx = static_cast<int>(g.nx() / 2) - 1, hy = static_cast<int>(g.ny() / 2) - 1;
  for (int n = 0; n <= hx; ++n)
    for (int m = -hy; m <= hy; ++m) {
      if (n == 0 && (m <= 0 || !zero_fiber)) continue;
      const double decay = 1.0 / (1.0 + 0.1 * (n * n + m * m));
      f.modes.push_back({2.0 * pi * n / g.lx(), 2.0 * pi * m / g.ly(), decay * nd(rng), decay * nd(rng)});
    }
  return f;
}

// X_k from its definition, cell by cell, summing j until the weights vanish.
double xk_oracle(const SpaceTimeField& f) {
  std::vector<double> acc(64, 0.0);
  for (std::size_t a = 0; a < f.xi().count; ++a) {
    const double xi = f.xi().value(a);
    if (xi == 0.0) continue;
    for (std::size_t b = 0; b < f.mu().count; ++b) {
      const double mu = f.mu().value(b);
      const double w = xi * xi * xi + mu * mu / xi;
      for (std::size_t c = 0; c < f.tau().count; ++c) {
        const double sigma = f.tau_value(a, b, c) - w;
        for (int j = 0; j < 64; ++j) {
          const double e = test::shell_weight(j, sigma);
          acc[j] += e * e * std::norm(f(a, b, c)) * f.cell_volume();
        }
      }
    }
  }
  double v = 0.0;
  for (int j = 0; j < 64; ++j) v += std::pow(2.0, 0.5 * j) * std::sqrt(acc[j]);
  return v;
}

Outcome norm_oracles(Runner&) {
  Outcome o;
  const Stopwatch sw;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  const int fields = 60;

  double hs_worst = 0.0;
  for (int i = 0; i < fields; ++i) {
    const Grid g(16, 16, 2.0 * pi * (0.5 + 2.0 * ud(rng)), 2.0 * pi * (0.5 + 2.0 * ud(rng)));
    const auto f = random_trig(g, rng, true);
    const double s = -1.0 + 3.0 * ud(rng);
    const double expect = std::sqrt(f.weighted([s](double xi) { return std::pow(1.0 + xi * xi, s / 2.0); }));
    hs_worst = std::max(hs_worst, rel(hs0_norm(to_spectral(f.physical()), s), expect));
  }

  double xk_worst = 0.0;
  for (int i = 0; i < fields; ++i) {
    const int k = i % 4;
    const Grid g(16, 16, 2.0 * pi * (1.0 + ud(rng)), 2.0 * pi * (1.0 + 3.0 * ud(rng)));
    auto f = SpaceTimeField::on_grid(g, 16, 2.0 * pi / (2.0 + 8.0 * ud(rng)));
    std::normal_distribution<double> nd;
    for (std::size_t a = 0; a < f.xi().count; ++a) {
      if (!DyadicShell{k, k == 0}.contains(f.xi().value(a))) continue;
      for (std::size_t b = 0; b < f.mu().count; ++b)
        for (std::size_t c = 0; c < f.tau().count; ++c) f(a, b, c) = Complex(nd(rng), nd(rng));
    }
    xk_worst = std::max(xk_worst, rel(xk_norm(f, k).value, xk_oracle(f)));
  }

  double es_worst = 0.0;
  for (int i = 0; i < fields; ++i) {
    const Grid g(16, 16, 2.0 * pi * (0.25 + ud(rng)), 2.0 * pi * (0.5 + ud(rng)));
    const double s = 1.5 * ud(rng);
    Trajectory traj;
    std::vector<TrigField> snaps;
    for (int t = 0; t < 4; ++t) {
      snaps.push_back(random_trig(g, rng, false));
      const auto u = to_spectral(snaps.back().physical());
      traj.snapshots.push_back({0.1 * t, u, mass(u), 0.0, {}});
    }
    double sq = snaps.front().weighted([](double xi) { return test::bump(xi); });
    for (int k = 1; k < 40; ++k) {
      double sup = 0.0;
      for (const auto& f : snaps) sup = std::max(sup, f.weighted([k](double xi) { return test::shell_weight(k, xi); }));
      sq += std::exp2(2.0 * s * k) * sup;
    }
    es_worst = std::max(es_worst, rel(es_norm(traj, s, 0.3), std::sqrt(sq)));
  }

  const double secs = sw.seconds();
  o.details.push_back(fmt("H^{s,0}: %d fields on 16x16, max relative error %.3e", fields, hs_worst));
  o.details.push_back(fmt("X_k: %d fields on 16^3, max relative error %.3e", fields, xk_worst));
  o.details.push_back(fmt("E^s: %d four-snapshot trajectories on 16x16, max relative error %.3e", fields, es_worst));
  const double worst = std::max({hs_worst, xk_worst, es_worst});
  o.pass = worst <= 1e-10 && secs < 60.0;
  o.summary = fmt("norm oracles: max relative error %.3e over %d fields per norm (<= 1e-10), %.1f s (< 60 s)", worst,
                  fields, secs);
  return o;
}

// Criterion 5 -----------------------------------------------------------------

double max_abs(const SpectralField2D& u) {
  double m = 0.0;
  for (auto c : u.coeff()) m = std::max(m, std::abs(c));
  return m;
}

Outcome littlewood_paley(Runner&) {
  Outcome o;
  std::mt19937_64 rng(505);
  std::normal_distribution<double> nd;
  double tele = 0.0, orth = 0.0;
  int pairs = 0;
  for (const Grid& g : {Grid(256, 16, 2 * pi, 3.0), Grid(128, 64, 5.0, 2 * pi), Grid(512, 8, 40.0, 1.0)}) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> v(g.size());
      for (auto& x : v) x = nd(rng);
      const auto u = enforce_kp_constraint(to_spectral(RealField2D(g, v)));
      const double scale = max_abs(u);
      const int top = top_shell(g);
      SpectralField2D sum = project_shell(u, 0, ShellMode::le_k);
      for (int k = 1; k <= top + 1; ++k) sum = sum + project_shell(u, k);
      tele = std::max(tele, max_abs(sum - u) / scale);
      for (int k = 0; k <= top + 1; ++k) {
        const auto pk = project_shell(u, k);
        for (int kk = 0; kk <= top + 1; ++kk) {
          if (std::abs(k - kk) < 2) continue;
          orth = std::max(orth, max_abs(project_shell(pk, kk)) / scale);
          ++pairs;
        }
      }
    }
  }
  o.pass = tele <= 1e-12 && orth <= 1e-12;
  o.summary = fmt("Littlewood-Paley algebra: telescoping error %.3e, max |P_k P_k'| %.3e over %d pairs (<= 1e-12)", tele,
                  orth, pairs);
  return o;
}

// Criterion 6 -----------------------------------------------------------------

SpaceTimeField random_patch(std::mt19937_64& rng, double h, long f0, long f1, long f2, double density) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<Complex> v(512);
  for (auto& x : v) x = ud(rng) < density ? ud(rng) : 0.0;
  return {LatticeAxis{h, f0, 8}, LatticeAxis{h, f1, 8}, LatticeAxis{h, f2, 8}, std::move(v)};
}

double direct_trilinear(const SpaceTimeField& f1, const SpaceTimeField& f2, const SpaceTimeField& f3) {
  const auto at = [&](long x0, long x1, long x2) -> double {
    const long c0 = x0 - f3.xi().first, c1 = x1 - f3.mu().first, c2 = x2 - f3.tau().first;
    if (c0 < 0 || c1 < 0 || c2 < 0 || c0 >= 8 || c1 >= 8 || c2 >= 8) return 0.0;
    return f3(static_cast<std::size_t>(c0), static_cast<std::size_t>(c1), static_cast<std::size_t>(c2)).real();
  };
  double s = 0.0;
  for (std::size_t a0 = 0; a0 < 8; ++a0)
    for (std::size_t a1 = 0; a1 < 8; ++a1)
      for (std::size_t a2 = 0; a2 < 8; ++a2)
        for (std::size_t b0 = 0; b0 < 8; ++b0)
          for (std::size_t b1 = 0; b1 < 8; ++b1)
            for (std::size_t b2 = 0; b2 < 8; ++b2)
              s += f1(a0, a1, a2).real() * f2(b0, b1, b2).real() *
                   at(f1.xi().first + static_cast<long>(a0) + f2.xi().first + static_cast<long>(b0),
                      f1.mu().first + static_cast<long>(a1) + f2.mu().first + static_cast<long>(b1),
                      f1.tau().first + static_cast<long>(a2) + f2.tau().first + static_cast<long>(b2));
  const double dv = f1.cell_volume();
  return s * dv * dv;
}

Outcome trilinear(Runner&) {
  Outcome o;
  const Stopwatch sw;
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<long> off(-5, 5);
  std::uniform_real_distribution<double> ud(0.1, 2.0);
  const int triples = 120;
  double worst = 0.0;
  for (int t = 0; t < triples; ++t) {
    const double h = ud(rng);
    const auto f1 = random_patch(rng, h, off(rng), off(rng), off(rng), 1.0);
    const auto f2 = random_patch(rng, h, off(rng), off(rng), off(rng), 0.7);
    const auto f3 = random_patch(rng, h, f1.xi().first + f2.xi().first + off(rng), f1.mu().first + f2.mu().first + off(rng),
                                 f1.tau().first + f2.tau().first + off(rng), 1.0);
    const double slow = direct_trilinear(f1, f2, f3);
    const double fast = trilinear_form(f1, f2, f3);
    worst = std::max(worst, std::abs(fast - slow) / std::max(std::abs(slow), 1e-300));
  }
  const double secs = sw.seconds();
  o.pass = worst <= 1e-10 && secs < 60.0;
  o.summary = fmt("trilinear oracle: %d triples on 8^3, max relative error %.3e (<= 1e-10), %.1f s (< 60 s)", triples,
                  worst, secs);
  return o;
}

// Criterion 7 -----------------------------------------------------------------

Outcome sweeps(Runner& r) {
  Outcome o;
  const Stopwatch sw;
  const int rc = r.first("sweep_suite");
  const double secs = sw.seconds();
  if (rc != cli::kExitOk) {
    o.summary = fmt("estimate sweeps: verify exited with %d", rc);
    return o;
  }
  const auto report = Json::parse(slurp(r.first_runs["sweep_suite"].first / "report.json"));
  bool ok = true;
  double worst_slope = -INFINITY;
  std::set<std::string> ids;
  for (const auto& s : report["sweeps"]) {
    const std::string id = s["estimate_id"];
    ids.insert(id);
    const std::size_t samples = s["samples_per_cell"];
    const double gmax = s["global_max"].is_number() ? s["global_max"].get<double>() : NAN;
    bool sweep_ok = samples >= 200 && !s["cells"].empty() && std::isfinite(gmax) && !s["slopes"].empty();
    std::string slopes;
    for (const auto& [param, v] : s["slopes"].items()) {
      const double slope = v.is_number() ? v.get<double>() : NAN;
      sweep_ok = sweep_ok && slope <= 0.1;
      worst_slope = std::max(worst_slope, slope);
      slopes += fmt(" %s %+.3f", param.c_str(), slope);
    }
    ok = ok && sweep_ok;
    o.details.push_back(fmt("%-9s %2zu cells x %zu samples, max ratio %.3e, slopes:%s%s", id.c_str(), s["cells"].size(),
                            samples, gmax, slopes.c_str(), sweep_ok ? "" : "  <- exceeds 0.1"));
  }
  const bool all_ids = ids.size() == 8;
  o.pass = ok && all_ids && secs < 600.0;
  o.summary = fmt("estimate sweeps: %zu sweeps over %zu estimates, max slope %+.3f (<= 0.1), %.0f s (< 600 s)",
                  report["sweeps"].size(), ids.size(), worst_slope, secs);
  return o;
}

// Criterion 8 -----------------------------------------------------------------

Outcome cancellation(Runner&) {
  Outcome o;
  std::mt19937_64 rng(808);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const int fields = 120;
  double worst = 0.0;
  for (int i = 0; i < fields; ++i) {
    const std::size_t nx = std::size_t{32} << (i % 3), ny = std::size_t{16} << ((i / 3) % 3);
    const Grid g(nx, ny, 2.0 * pi * (0.5 + 4.0 * ud(rng)), 2.0 * pi * (0.5 + 4.0 * ud(rng)));
    std::vector<double> v(g.size());
    const double amp = std::pow(10.0, -3.0 + 6.0 * ud(rng));
    for (auto& x : v) x = amp * nd(rng);
    const auto u = dealias(enforce_kp_constraint(to_spectral(RealField2D(g, v))), 2.0 / 3.0);
    // nonlinear_rhs(u) = -d_x(u^2) / 2.
    const double lhs = std::abs(2.0 * inner_product(u, nonlinear_rhs(u)));
    const double l2 = u.l2_norm();
    worst = std::max(worst, lhs / (l2 * l2 * hs0_norm(u, 1.0)));
  }
  o.pass = worst <= 1e-10;
  o.summary = fmt("cancellation: max |<u, d_x(u^2)>| / (|u|^2 |u|_{H^{1,0}}) = %.3e over %d dealiased fields (<= 1e-10)",
                  worst, fields);
  return o;
}

// Criterion 9 -----------------------------------------------------------------

Outcome continuity(Runner& r) {
  Outcome o;
  const Stopwatch sw;
  const int rc = r.first("continuity");
  const double secs = sw.seconds();
  const auto p = r.first_runs["continuity"].first / "probe.json";
  if (!fs::exists(p)) {
    o.summary = fmt("flow-map continuity: probe exited with %d and wrote no result", rc);
    return o;
  }
  const auto j = Json::parse(slurp(p));
  const auto eps = j["inputs"]["eps"].get<std::vector<double>>();
  const bool ladder = eps == std::vector<double>{1e-2, 1e-3, 1e-4} && j["inputs"]["s"] == 0.75;
  const double variation = j["measured"]["ratio_variation"];
  const bool blew = j["measured"]["blew_up"];
  for (const auto& e : j["measured"]["ladder"])
    o.details.push_back(fmt("eps %.0e: R = %.6f", e["eps"].get<double>(), e["ratio"].get<double>()));
  o.pass = rc == cli::kExitOk && ladder && !blew && variation <= 2.0 && secs < 600.0;
  o.summary = fmt("flow-map continuity: R varies by %.6fx (<= 2x) over eps in {1e-2, 1e-3, 1e-4} at s = 0.75, "
                  "blow-up %s, %.0f s (< 600 s)",
                  variation, blew ? "tripped" : "never tripped", secs);
  return o;
}

// Criterion 10 ----------------------------------------------------------------

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return files;
}

Outcome determinism(Runner& r) {
  Outcome o;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(kConfigs))
    if (e.path().extension() == ".toml") names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  bool ok = !names.empty();
  std::size_t files = 0;
  for (const auto& name : names) {
    if (!kShipped.contains(name)) {
      o.details.push_back(name + ": no command registered for this config");
      ok = false;
      continue;
    }
    if (!r.first_runs.contains(name)) r.first(name);
    const auto [first_dir, first_rc] = r.first_runs[name];
    const auto second_dir = r.out / name / "second";
    const int rc = r.run(name, second_dir);
    const auto a = tree(first_dir), b = tree(second_dir);
    const bool same = rc == first_rc && a == b && !a.empty();
    files += a.size();
    ok = ok && same;
    o.details.push_back(fmt("%-18s %-16s exit %d, %3zu files %s", name.c_str(), cli::to_string(kShipped.at(name)).c_str(),
                            rc, a.size(), same ? "identical" : "DIFFER"));
  }
  o.pass = ok;
  o.summary = fmt("determinism: %zu shipped configs rerun, %zu output files compared byte for byte", names.size(), files);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome(Runner&)>>> criteria = {
      {"linear", linear_exactness}, {"conservation", conservation}, {"scaling", scaling},
      {"norms", norm_oracles},      {"littlewood-paley", littlewood_paley}, {"trilinear", trilinear},
      {"sweeps", sweeps},           {"cancellation", cancellation},       {"continuity", continuity},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  Runner runner{fs::current_path() / "acceptance-out", {}};
  fs::remove_all(runner.out);
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(runner);
    } catch (const std::exception& e) {
      o.summary = std::string(criteria[i].first) + ": threw " + e.what();
    }
    ++ran;
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << std::setw(2) << id << " " << o.summary << "\n";
    for (const auto& d : o.details) std::cout << "        " << d << "\n";
    std::cout.flush();
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
