#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "kpi/bourgain.hpp"
#include "kpi/dyadic.hpp"
#include "kpi/rng.hpp"
#include "kpi/snapshot_io.hpp"
#include "kpi/spectral.hpp"
#include "manifest.hpp"

namespace kpi::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kCommandNames[] = {"run", "norms", "verify", "probe-continuity", "probe-energy", "scaling-check"};

/// Raised when a blow-up flag ends a command; maps to exit code 2.
struct BlowUp {
  std::string what;
};

Json row(const std::string& digest) {
  Json j;
  j["digest"] = digest;
  return j;
}

std::string key_of(double s) {
  std::ostringstream ss;
  ss << s;
  return ss.str();
}

double relative(double value, double reference) {
  const double d = std::abs(value - reference);
  return reference != 0.0 ? d / std::abs(reference) : d;
}

// Writes files atomically and records their names for the manifest.
class ResultWriter {
 public:
  ResultWriter(std::filesystem::path dir, std::string kind, std::string digest, std::uint64_t seed)
      : dir_(std::move(dir)) {
    manifest_.kind = std::move(kind);
    manifest_.digest = std::move(digest);
    manifest_.code_version = code_version();
    manifest_.seed = seed;
    std::filesystem::create_directories(dir_);
    claim_result_dir(dir_, manifest_.digest);
  }

  const std::string& digest() const { return manifest_.digest; }

  void text(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path, content);
    manifest_.outputs.push_back(name);
  }

  void bytes(const std::string& name, const std::vector<unsigned char>& content) {
    const auto path = dir_ / name;
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path, content);
    manifest_.outputs.push_back(name);
  }

  void finish() { write_file_atomic(dir_ / "manifest.json", manifest_.to_json()); }

 private:
  std::filesystem::path dir_;
  RunManifest manifest_;
};

template <typename F>
auto as_config_error(const Section& s, std::string_view key, F&& f) {
  try {
    return f();
  } catch (const ContractError& e) {
    s.fail(key, e.what());
  }
}

}  // namespace

std::string to_string(Command command) { return kCommandNames[static_cast<int>(command)]; }

Command command_from_string(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kCommandNames[i]) return static_cast<Command>(i);
  throw ConfigError("unknown command '" + name + "'");
}

std::size_t threads_from_env() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* v = std::getenv("KPI_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || cap < 1) throw ConfigError("KPI_THREADS must be a positive integer, got '" + std::string(v) + "'");
    n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

std::string ProbeResult::to_json(const std::string& digest) const {
  Json j = row(digest);
  j["kind"] = kind;
  j["inputs"] = inputs;
  j["measured"] = measured;
  j["valid"] = valid;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

std::string ScalingResult::to_json(const std::string& digest) const {
  Json j = row(digest);
  j["m"] = m;
  j["lambda"] = std::ldexp(1.0, m);
  j["relative_error"] = relative_error;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

std::uint64_t seed_from(const Config& config, std::optional<std::uint64_t> override) {
  if (override) return *override;
  const auto v = config.root().integer("seed", 1);
  if (v < 0) config.root().fail("seed", "must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

Grid grid_from(const Config& config) {
  const auto s = config.section("grid");
  if (!s.present()) throw ConfigError("missing [grid] table");
  s.allow_only({"nx", "ny", "lx", "ly", "lx_pi", "ly_pi"});
  const auto length = [&](const char* plain, const char* in_pi) {
    if (s.has(plain) && s.has(in_pi)) s.fail(in_pi, std::string("give either ") + plain + " or " + in_pi);
    if (s.has(in_pi)) return s.number(in_pi) * std::numbers::pi;
    return s.number(plain);
  };
  const auto nx = s.integer("nx");
  const auto ny = s.integer("ny");
  if (nx <= 0) s.fail("nx", "must be positive");
  if (ny <= 0) s.fail("ny", "must be positive");
  const double lx = length("lx", "lx_pi");
  const double ly = length("ly", "ly_pi");
  return as_config_error(s, "nx", [&] {
    return Grid(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny), lx, ly);
  });
}

SolverConfig solver_from(const Config& config) {
  const auto s = config.section("solver");
  if (!s.present()) throw ConfigError("missing [solver] table");
  s.allow_only({"dt", "t_end", "integrator", "nonlinearity", "output_stride", "mu_sign", "dealias_fraction", "hs_orders",
                "blowup_factor"});
  SolverConfig c;
  c.dt = s.number("dt");
  c.t_end = s.number("t_end");
  c.integrator = as_config_error(s, "integrator", [&] { return integrator_from_string(s.string("integrator", "etdrk4")); });
  c.nonlinearity_on = s.boolean("nonlinearity", true);
  const auto stride = s.integer("output_stride", 1);
  if (stride < 1) s.fail("output_stride", "must be at least 1");
  c.output_stride = static_cast<std::size_t>(stride);
  c.mu_sign = s.number("mu_sign", 1.0);
  c.dealias_fraction = s.number("dealias_fraction", 2.0 / 3.0);
  c.hs_orders = s.numbers("hs_orders", std::vector<double>{0.0, 1.0});
  c.blowup_factor = s.number("blowup_factor", 1e6);
  const Grid g = grid_from(config);
  as_config_error(s, "dt", [&] {
    c.validate(g);
    return 0;
  });
  return c;
}

SpectralField2D random_band(const Grid& grid, double amplitude, double xi_min, double xi_max, double mu_max,
                            double decay, std::uint64_t seed) {
  detail::Rng rng(seed);
  SpectralField2D probe(grid);
  std::vector<Complex> c(grid.size());
  for (int n = 1; n <= grid.max_x_mode(); ++n) {
    const double xi = grid.xi(n);
    for (int m = grid.min_y_mode() + 1; m <= grid.max_y_mode(); ++m) {
      const double a = rng.normal();
      const double b = rng.normal();
      if (xi < xi_min || xi > xi_max || std::abs(grid.mu(m)) > mu_max) continue;
      if (!dealias_keep(grid, n, m, 2.0 / 3.0)) continue;
      const Complex z = std::pow(1.0 + xi * xi, -0.5 * decay) * Complex(a, b);
      c[probe.index(n, m)] = z;
      c[probe.index(-n, -m)] = std::conj(z);
    }
  }
  SpectralField2D f(grid, std::move(c));
  const double norm = f.l2_norm();
  if (norm == 0.0) throw ContractError("random band holds no modes of the grid");
  return (amplitude / norm) * f;
}

SpectralField2D initial_data(const Config& config, const Grid& grid, std::uint64_t seed) {
  const auto s = config.section("initial");
  if (!s.present()) throw ConfigError("missing [initial] table");
  const std::string kind = s.string("kind");
  if (kind == "gaussian_pair") {
    s.allow_only({"kind", "amplitude", "width", "separation", "center_x", "center_y"});
    const double amp = s.number("amplitude", 1.0);
    const double w = s.number("width", 1.0);
    if (!(w > 0.0)) s.fail("width", "must be positive");
    const double d = s.number("separation", 1.5 * w);
    const double cx = s.number("center_x", 0.5 * grid.lx());
    const double cy = s.number("center_y", 0.5 * grid.ly());
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double x = grid.dx() * static_cast<double>(i) - cx;
      for (std::size_t j = 0; j < grid.ny(); ++j) {
        const double y = grid.dy() * static_cast<double>(j) - cy;
        const double g1 = std::exp(-((x + d) * (x + d) + y * y) / (w * w));
        const double g2 = std::exp(-((x - d) * (x - d) + y * y) / (w * w));
        v[i * grid.ny() + j] = amp * (g1 - g2);
      }
    }
    return enforce_kp_constraint(to_spectral(RealField2D(grid, std::move(v))));
  }
  if (kind == "random_band") {
    s.allow_only({"kind", "amplitude", "xi_min", "xi_max", "mu_max", "decay"});
    const double amp = s.number("amplitude", 1.0);
    const double xi_min = s.number("xi_min", 0.0);
    const double xi_max = s.number("xi_max");
    const double mu_max = s.number("mu_max");
    const double decay = s.number("decay", 0.0);
    if (amp == 0.0) return SpectralField2D(grid);
    return as_config_error(s, "xi_max", [&] { return random_band(grid, amp, xi_min, xi_max, mu_max, decay, seed); });
  }
  if (kind == "file") {
    s.allow_only({"kind", "path"});
    auto path = std::filesystem::path(s.string("path"));
    if (path.is_relative()) path = config.base_dir() / path;
    const auto u = as_config_error(s, "path", [&] { return read_snapshot(path); });
    if (!(u.grid() == grid)) s.fail("path", "snapshot grid does not match [grid]");
    return enforce_kp_constraint(to_spectral(u));
  }
  s.fail("kind", "expected gaussian_pair, random_band or file, got '" + kind + "'");
}

std::vector<SweepConfig> sweeps_from(const Config& config, std::uint64_t seed, std::size_t threads) {
  auto entries = config.sections("sweep");
  if (entries.empty()) {
    const auto single = config.section("sweep");
    if (!single.present()) throw ConfigError("missing [sweep] or [[sweep]] tables");
    entries.push_back(single);
  }
  std::vector<SweepConfig> out;
  for (const auto& s : entries) {
    s.allow_only({"id", "k1", "k2", "k3", "j1", "j2", "j3", "cells", "samples", "family", "ascent_steps", "g2", "g1",
                  "g0", "tri_time", "slope_flag"});
    SweepConfig c;
    c.id = as_config_error(s, "id", [&] { return estimate_from_string(s.string("id")); });
    for (std::size_t i = 0; i < 6; ++i) c.ranges[i] = s.integers(kParamNames[i], std::vector<int>{});
    for (const auto& r : s.integer_rows("cells")) {
      if (r.empty() || r.size() > 6) s.fail("cells", "each cell lists 1 to 6 of k1, k2, k3, j1, j2, j3");
      int v[6] = {};
      std::copy(r.begin(), r.end(), v);
      c.cells.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    }
    const auto samples = s.integer("samples", 200);
    if (samples < 1) s.fail("samples", "must be at least 1");
    c.samples_per_cell = static_cast<std::size_t>(samples);
    c.family = as_config_error(s, "family", [&] { return family_from_string(s.string("family", "random_nonneg")); });
    c.ascent_steps = static_cast<int>(s.integer("ascent_steps", 0));
    c.regime.g2 = static_cast<int>(s.integer("g2", 8));
    c.regime.g1 = static_cast<int>(s.integer("g1", 4));
    c.regime.g0 = static_cast<int>(s.integer("g0", 2));
    c.tri_time = s.number("tri_time", c.tri_time);
    if (!(c.tri_time > 0.0)) s.fail("tri_time", "must be positive");
    c.slope_flag = s.number("slope_flag", 0.1);
    c.seed = seed;
    c.threads = threads;
    out.push_back(std::move(c));
  }
  return out;
}

ProbeResult probe_continuity(const Config& config, std::uint64_t seed) {
  const Grid g = grid_from(config);
  const SolverConfig cfg = solver_from(config);
  const auto p = config.section("probe");
  p.allow_only({"kind", "s", "eps", "ratio_bound", "variation_max", "amplitudes", "perturbation_xi_max",
                "perturbation_mu_max", "perturbation_decay"});
  const std::string kind = p.string("kind", "flow_continuity");
  const double s = p.number("s", 0.75);
  const SpectralField2D phi = initial_data(config, g, seed);
  ProbeResult r;
  r.kind = kind;
  r.inputs["s"] = s;
  r.inputs["nx"] = g.nx();
  r.inputs["ny"] = g.ny();
  r.inputs["dt"] = cfg.dt;
  r.inputs["t_end"] = cfg.t_end;

  if (kind == "existence_time") {
    const auto amps = p.numbers("amplitudes", std::vector<double>{1.0, 2.0, 4.0, 8.0});
    r.inputs["amplitudes"] = amps;
    Json rows = Json::array();
    std::vector<std::pair<double, double>> curve;
    for (double a : amps) {
      const auto traj = evolve(a * phi, cfg);
      const double norm = hs0_norm(a * phi, s);
      Json e;
      e["amplitude"] = a;
      e["hs0_norm"] = norm;
      e["t_reached"] = traj.back().t;
      e["blew_up"] = traj.blew_up;
      rows.push_back(e);
      curve.emplace_back(norm, traj.back().t);
    }
    std::sort(curve.begin(), curve.end());
    bool monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].second <= curve[i - 1].second;
    r.measured["ladder"] = rows;
    r.measured["t_nonincreasing_in_norm"] = monotone;
    r.pass = monotone;
    return r;
  }
  if (kind != "flow_continuity") p.fail("kind", "expected flow_continuity or existence_time, got '" + kind + "'");

  const auto eps = p.numbers("eps", std::vector<double>{1e-2, 1e-3, 1e-4});
  const double bound = p.number("ratio_bound", 1e3);
  const double variation = p.number("variation_max", 2.0);
  for (double e : eps)
    if (!(e > 0.0)) p.fail("eps", "entries must be positive");
  r.inputs["eps"] = eps;
  r.inputs["ratio_bound"] = bound;
  r.inputs["variation_max"] = variation;

  // Unit direction in H^{s-1,0}.
  const double xi_top = p.number("perturbation_xi_max", 0.25 * std::abs(g.xi(g.min_x_mode())));
  const double mu_top = p.number("perturbation_mu_max", 0.25 * std::abs(g.mu(g.min_y_mode())));
  auto dir = as_config_error(p, "perturbation_xi_max", [&] {
    return random_band(g, 1.0, 0.0, xi_top, mu_top, p.number("perturbation_decay", 2.0), detail::mix_seed(seed, 1, 0));
  });
  dir = (1.0 / hs0_norm(dir, s - 1.0)) * dir;

  const auto base = evolve(phi, cfg);
  if (base.blew_up) r.valid = false;
  Json rows = Json::array();
  double rmin = INFINITY, rmax = 0.0;
  for (double e : eps) {
    const SpectralField2D phi2 = phi + e * dir;
    const auto other = evolve(phi2, cfg);
    if (other.blew_up) r.valid = false;
    const std::size_t n = std::min(base.snapshots.size(), other.snapshots.size());
    double low = 0.0, high = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = base.snapshots[i].field - other.snapshots[i].field;
      low = std::max(low, hs0_norm(d, s - 1.0));
      high = std::max(high, hs0_norm(d, s));
    }
    const auto d0 = phi - phi2;
    const double weak = hs0_norm(d0, s - 1.0);
    const double h1_rhs = hs0_norm(d0, s) + hs0_norm(phi, s + 1.0) * weak;
    Json row;
    row["eps"] = e;
    row["initial_difference"] = weak;
    row["ratio"] = low / weak;
    row["strong_ratio"] = high / h1_rhs;
    rows.push_back(row);
    rmin = std::min(rmin, low / weak);
    rmax = std::max(rmax, low / weak);
  }
  r.measured["ladder"] = rows;
  r.measured["ratio_max"] = rmax;
  r.measured["ratio_variation"] = rmax / rmin;
  r.measured["blew_up"] = !r.valid;
  r.pass = r.valid && rmax <= bound && rmax / rmin <= variation;
  return r;
}

ProbeResult probe_energy(const Config& config, std::uint64_t seed) {
  const Grid g = grid_from(config);
  const SolverConfig cfg = solver_from(config);
  const auto p = config.section("probe");
  p.allow_only({"s", "s_half", "mass_tolerance", "identity_tolerance"});
  const double s = p.number("s", 0.75);
  const double s_half = p.number("s_half", 0.51);
  const double mass_tol = p.number("mass_tolerance", 1e-6);
  const double id_tol = p.number("identity_tolerance", 1e-6);
  const SpectralField2D phi = initial_data(config, g, seed);
  ProbeResult r;
  r.kind = "energy_bound";
  r.inputs["s"] = s;
  r.inputs["s_half"] = s_half;
  r.inputs["mass_tolerance"] = mass_tol;
  r.inputs["identity_tolerance"] = id_tol;
  r.inputs["nonlinearity"] = cfg.nonlinearity_on;

  const auto traj = evolve(phi, cfg);
  r.valid = !traj.blew_up;
  const double m0 = phi.l2_norm() * phi.l2_norm();
  // d/dt ||u||^2 = 2 <u, N(u)>; the dispersive part is skew.
  double accumulated = 0.0, identity = 0.0, drift = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto& snap = traj.snapshots[i];
    const double rate =
        cfg.nonlinearity_on ? 2.0 * inner_product(snap.field, nonlinear_rhs(snap.field, cfg.dealias_fraction)) : 0.0;
    if (i > 0) accumulated += 0.5 * (rate + prev) * (snap.t - traj.snapshots[i - 1].t);
    prev = rate;
    const double l2sq = snap.field.l2_norm() * snap.field.l2_norm();
    const double scale = m0 > 0.0 ? m0 : 1.0;
    identity = std::max(identity, std::abs(l2sq - m0 - accumulated) / scale);
    drift = std::max(drift, relative(snap.mass, traj.snapshots.front().mass));
  }
  const double t_final = traj.back().t;
  const auto series = profile_series(traj);
  const double es = es_norm(traj, s, t_final);
  const double f_half = fs_norm(series, s_half);
  const double f_s = fs_norm(series, s);
  const double h = hs0_norm(phi, s);
  const double rhs = h * h + f_half * f_s * f_s;
  r.measured["max_mass_drift"] = drift;
  r.measured["identity_residual"] = identity;
  r.measured["es_squared"] = es * es;
  r.measured["hs0_squared"] = h * h;
  r.measured["f_half"] = f_half;
  r.measured["f_s"] = f_s;
  r.measured["energy_constant"] = rhs > 0.0 ? es * es / rhs : 0.0;
  r.measured["t_reached"] = t_final;
  r.pass = r.valid && drift <= mass_tol && identity <= id_tol;
  return r;
}

ScalingResult scaling_check(const Config& config, std::uint64_t seed) {
  const Grid g = grid_from(config);
  SolverConfig cfg = solver_from(config);
  const auto p = config.section("scaling");
  p.allow_only({"m", "tolerance"});
  ScalingResult r;
  r.m = static_cast<int>(p.integer("m", 1));
  if (r.m < 0 || r.m > 4) p.fail("m", "must lie in 0..4");
  r.tolerance = p.number("tolerance", 1e-8);
  const SpectralField2D phi = initial_data(config, g, seed);
  cfg.output_stride = std::numeric_limits<std::size_t>::max();
  const auto first = evolve(phi, cfg);
  if (first.blew_up) throw BlowUp{"blow-up flag tripped in the unscaled run"};
  const auto a = scale_solution(first.back().field, r.m);
  const double cube = std::ldexp(1.0, 3 * r.m);
  cfg.dt /= cube;
  cfg.t_end /= cube;
  const auto second = evolve(scale_solution(phi, r.m), cfg);
  if (second.blew_up) throw BlowUp{"blow-up flag tripped in the scaled run"};
  const auto& b = second.back().field;
  const double ref = h10_norm(a);
  r.relative_error = ref > 0.0 ? h10_norm(a - b) / ref : h10_norm(a - b);
  r.pass = r.relative_error <= r.tolerance;
  return r;
}

namespace {

int cmd_run(const Config& config, std::uint64_t seed, ResultWriter& w) {
  config.allow_only({"seed", "grid", "solver", "initial", "output"});
  const Grid g = grid_from(config);
  const SolverConfig cfg = solver_from(config);
  const auto o = config.section("output");
  o.allow_only({"snapshots", "snapshot_every"});
  const bool snapshots = o.boolean("snapshots", true);
  const auto every = o.integer("snapshot_every", 1);
  if (every < 1) o.fail("snapshot_every", "must be at least 1");
  const SpectralField2D phi = initial_data(config, g, seed);
  Trajectory traj;
  try {
    traj = evolve(phi, cfg);
  } catch (const NonFiniteStateError& e) {
    w.bytes("diagnostic.bin", encode_snapshot(to_physical(e.last_good().field)));
    w.finish();
    throw;
  }
  std::string jsonl;
  const auto& first = traj.snapshots.front();
  double max_dm = 0.0, max_de = 0.0;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto& snap = traj.snapshots[i];
    Json j = row(w.digest());
    j["t"] = snap.t;
    j["mass"] = snap.mass;
    j["energy"] = snap.energy;
    j["mass_drift"] = relative(snap.mass, first.mass);
    j["energy_drift"] = relative(snap.energy, first.energy);
    max_dm = std::max(max_dm, relative(snap.mass, first.mass));
    max_de = std::max(max_de, relative(snap.energy, first.energy));
    Json hs = Json::object();
    for (const auto& [order, value] : snap.hs_norms) hs[key_of(order)] = value;
    j["hs_norms"] = hs;
    const bool write = snapshots && (i % static_cast<std::size_t>(every) == 0 || i + 1 == traj.snapshots.size());
    if (write) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshots/snap_%06zu.bin", i);
      w.bytes(name, encode_snapshot(to_physical(snap.field)));
      j["snapshot_file"] = name;
    } else {
      j["snapshot_file"] = nullptr;
    }
    jsonl += j.dump() + "\n";
  }
  w.text("trajectory.jsonl", jsonl);
  Json sum = row(w.digest());
  sum["blew_up"] = traj.blew_up;
  sum["steps_taken"] = traj.steps_taken;
  sum["step"] = traj.step;
  sum["t_final"] = traj.back().t;
  sum["max_mass_drift"] = max_dm;
  sum["max_energy_drift"] = max_de;
  w.text("summary.json", sum.dump(2) + "\n");
  w.finish();
  return traj.blew_up ? kExitBlowup : kExitOk;
}

int cmd_norms(const Config& config, std::uint64_t seed, ResultWriter& w) {
  config.allow_only({"seed", "grid", "solver", "initial", "norms"});
  const Grid g = grid_from(config);
  const SpectralField2D phi = initial_data(config, g, seed);
  const auto n = config.section("norms");
  n.allow_only({"hs", "es", "fs", "ns"});
  std::string out;
  const auto emit = [&](NormReport rep) {
    Json j = row(w.digest());
    const auto body = Json::parse(rep.to_json_line());
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    out += j.dump() + "\n";
  };
  for (double s : n.numbers("hs", std::vector<double>{0.0, 1.0})) emit({"Hs0", {{"s", s}}, hs0_norm(phi, s), ""});
  const auto es = n.numbers("es", std::vector<double>{});
  const auto fs = n.numbers("fs", std::vector<double>{});
  const auto ns = n.numbers("ns", std::vector<double>{});
  if (!es.empty() || !fs.empty() || !ns.empty()) {
    const SolverConfig cfg = solver_from(config);
    const auto traj = evolve(phi, cfg);
    if (traj.blew_up) throw BlowUp{"blow-up flag tripped before the norms could be taken"};
    const double T = traj.back().t;
    for (double s : es) emit({"Es", {{"s", s}, {"T", T}}, es_norm(traj, s, T), ""});
    const std::string natural = "evaluated on the solver's natural extension, not the infimum over extensions";
    if (!fs.empty() || !ns.empty()) {
      const auto series = profile_series(traj);
      for (double s : fs) emit({"Fs", {{"s", s}, {"T", T}}, fs_norm(series, s), natural});
      for (double s : ns) emit({"Ns", {{"s", s}, {"T", T}}, ns_norm(series, s), natural});
    }
  }
  w.text("norms.jsonl", out);
  w.finish();
  return kExitOk;
}

int cmd_verify(const Config& config, std::uint64_t seed, std::size_t threads, ResultWriter& w, std::ostream& err) {
  config.allow_only({"seed", "sweep"});
  const auto sweeps = sweeps_from(config, seed, threads);
  std::string csv = csv_header() + ",digest\n";
  Json reports = Json::array();
  bool pass = true;
  for (const auto& c : sweeps) {
    const auto rep = run_sweep(c);
    for (const auto& s : rep.samples) csv += to_csv_row(s) + "," + w.digest() + "\n";
    Json j = Json::parse(rep.to_json());
    j["samples_per_cell"] = c.samples_per_cell;
    j["slope_flag"] = c.slope_flag;
    reports.push_back(j);
    const bool ok = rep.flagged.empty() && std::isfinite(rep.global_max) && !rep.cells.empty();
    pass = pass && ok;
    err << to_string(c.id) << ": " << rep.cells.size() << " cells, max ratio " << rep.global_max
        << (ok ? "" : " (flagged)") << "\n";
  }
  w.text("samples.csv", csv);
  Json j = row(w.digest());
  j["pass"] = pass;
  j["sweeps"] = reports;
  w.text("report.json", j.dump(2) + "\n");
  w.finish();
  return kExitOk;
}

int cmd_probe(const ProbeResult& r, ResultWriter& w) {
  w.text("probe.json", r.to_json(w.digest()));
  w.finish();
  return r.valid ? kExitOk : kExitBlowup;
}

}  // namespace

int execute(Command command, const CommandOptions& options, std::ostream& err) {
  try {
    const Config config = Config::load(options.config);
    const std::uint64_t seed = seed_from(config, options.seed);
    ResultWriter w(options.out, to_string(command), sha256_hex(config.bytes()), seed);
    switch (command) {
      case Command::run: return cmd_run(config, seed, w);
      case Command::norms: return cmd_norms(config, seed, w);
      case Command::verify: return cmd_verify(config, seed, options.threads, w, err);
      case Command::probe_continuity:
        config.allow_only({"seed", "grid", "solver", "initial", "probe"});
        return cmd_probe(probe_continuity(config, seed), w);
      case Command::probe_energy:
        config.allow_only({"seed", "grid", "solver", "initial", "probe"});
        return cmd_probe(probe_energy(config, seed), w);
      case Command::scaling_check: {
        config.allow_only({"seed", "grid", "solver", "initial", "scaling"});
        const auto r = scaling_check(config, seed);
        w.text("scaling.json", r.to_json(w.digest()));
        w.finish();
        return kExitOk;
      }
    }
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "config error in " << options.config.string() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const MixedDigestError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BlowUp& e) {
    err << "blow-up: " << e.what << "\n";
    return kExitBlowup;
  } catch (const ContractError& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace kpi::cli
