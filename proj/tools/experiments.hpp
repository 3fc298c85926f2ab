#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "kpi/estimates.hpp"
#include "kpi/solver.hpp"

namespace kpi::cli {

enum class Command { run, norms, verify, probe_continuity, probe_energy, scaling_check };

std::string to_string(Command command);
Command command_from_string(const std::string& name);

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitBlowup = 2, kExitNumerical = 3 };

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = "kpi-out";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

/// Worker count: hardware concurrency, capped by KPI_THREADS when set.
std::size_t threads_from_env();

/// Runs one command end to end and returns its exit code. Never throws;
/// diagnostics go to err.
int execute(Command command, const CommandOptions& options, std::ostream& err);

/// Result of a well-posedness probe. pass is a function of measured and the
/// tolerances recorded in inputs only.
struct ProbeResult {
  /// existence_time, flow_continuity, energy_bound or persistence.
  std::string kind;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json measured = nlohmann::ordered_json::object();
  /// False when a blow-up flag tripped during the probe.
  bool valid = true;
  bool pass = false;

  std::string to_json(const std::string& digest) const;
};

struct ScalingResult {
  int m = 1;
  double relative_error = 0.0;
  double tolerance = 1e-8;
  bool pass = false;

  std::string to_json(const std::string& digest) const;
};

// Pieces shared by the commands, the tests and the acceptance runner.

std::uint64_t seed_from(const Config& config, std::optional<std::uint64_t> override);
Grid grid_from(const Config& config);
SolverConfig solver_from(const Config& config);
/// Initial data of [initial]: gaussian_pair, random_band or file.
SpectralField2D initial_data(const Config& config, const Grid& grid, std::uint64_t seed);
/// Random data with |xi| in [xi_min, xi_max], |mu| <= mu_max and coefficient
/// decay (1 + xi^2)^{-decay/2}, inside the 2/3 mask, scaled to L2 norm `amplitude`.
SpectralField2D random_band(const Grid& grid, double amplitude, double xi_min, double xi_max, double mu_max,
                            double decay, std::uint64_t seed);
std::vector<SweepConfig> sweeps_from(const Config& config, std::uint64_t seed, std::size_t threads);

ProbeResult probe_continuity(const Config& config, std::uint64_t seed);
ProbeResult probe_energy(const Config& config, std::uint64_t seed);
ScalingResult scaling_check(const Config& config, std::uint64_t seed);

}  // namespace kpi::cli
