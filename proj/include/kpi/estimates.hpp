#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kpi/bourgain.hpp"
#include "kpi/error.hpp"
#include "kpi/spacetime.hpp"

namespace kpi {

enum class EstimateId { L3Z_A, L3Z_B1, L3Z_B2, HILOW_RED, PXK1, PXK3, TRI_A, TRI_B };
enum class FunctionFamily { cell_indicator, random_nonneg, gaussian_bump, tensor };

std::string to_string(EstimateId id);
EstimateId estimate_from_string(const std::string& name);
std::string to_string(FunctionFamily family);
FunctionFamily family_from_string(const std::string& name);

/// Raised when dyadic parameters fall outside an estimate's hypotheses. The
/// message names the violated clause.
class HypothesisError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Dyadic parameters of one estimate evaluation. Unused entries stay 0.
/// PXK1: (k1, j1) = (k, j). PXK3: (k1, j1, k2) = (k, j, l).
/// TRI_A: (k1, k2, k3). TRI_B: (k1, k2) = (k1, k).
struct DyadicParams {
  int k1 = 0, k2 = 0, k3 = 0;
  int j1 = 0, j2 = 0, j3 = 0;

  int value(std::size_t i) const;
  bool operator==(const DyadicParams&) const = default;
};

inline constexpr const char* kParamNames[6] = {"k1", "k2", "k3", "j1", "j2", "j3"};

/// Replaces the additive constants 20 / 10 / 5 of the hypotheses by g2 / g1 / g0.
struct RegimeScale {
  int g2 = 8;
  int g1 = 4;
  int g0 = 2;
};

struct EstimateSample {
  EstimateId id = EstimateId::L3Z_A;
  DyadicParams params;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  /// Part of lhs coming from a closed-form tail (HILOW_RED j3 sum).
  double tail = 0.0;
  std::uint64_t seed = 0;
};

/// Throws HypothesisError if params violate the hypotheses of id.
void check_hypotheses(EstimateId id, const DyadicParams& p, const RegimeScale& regime = {});

/// True when the L3Z_B1 branch applies: j_max <= k1 + k2 + k3 - g2 (ties go to B1).
bool l3z_b1_branch(const DyadicParams& p, const RegimeScale& regime = {});

/// Spacings of the common frequency lattice used by the estimate samples.
struct FrequencyLattice {
  double d_xi = 1.0;
  double d_mu = 1.0;
  double d_tau = 1.0;
};

/// Box of lattice cells. With n_tau = 0 the tau window is derived from the
/// region (axis-aligned frames only).
struct PatchWindow {
  long xi_first = 0;
  long mu_first = 0;
  std::size_t n_xi = 1;
  std::size_t n_mu = 1;
  long tau_first = 0;
  std::size_t n_tau = 0;
};

/// Affine frame x = origin + L y between lattice coordinates y and
/// (xi, mu, tau). A field g stored on the y-lattice represents f(x) = g(y);
/// Riemann sums for f use the sheared cells, so ||f|| = |det L|^{1/2} ||g||.
struct Frame {
  std::array<double, 9> map = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 3> origin = {0, 0, 0};

  std::array<double, 3> point(double y0, double y1, double y2) const noexcept;
  double det() const noexcept;
  bool is_identity() const noexcept;
};

/// Nonnegative function supported exactly in the lattice cells of the patch
/// whose images lie in `region`, normalised to unit L2 norm in x.
/// Throws ContractError if no cell of the patch lies in the region.
SpaceTimeField sample_region_function(const ModulationRegion& region, FunctionFamily family, std::uint64_t seed,
                                      const FrequencyLattice& lattice, const PatchWindow& patch,
                                      const Frame& frame = {});

/// (f1 * f2)(zeta) = sum f1(a) f2(zeta - a) dV on the common lattice, via FFT.
SpaceTimeField lattice_convolution(const SpaceTimeField& f1, const SpaceTimeField& f2);

/// Riemann sum of the integral of (f1 * f2) f3. All three fields must share
/// lattice spacings and carry no tau shift; windows may differ.
double trilinear_form(const SpaceTimeField& f1, const SpaceTimeField& f2, const SpaceTimeField& f3);

/// Fields and auxiliary data for one evaluation. L3Z_*: f = {f1, f2, f3};
/// HILOW_RED: {f1, f2}; PXK1 / PXK3: {f}. PXK3 also uses t0.
/// frames is empty (identity) or holds one frame per field, all with the same
/// linear part and with origin(f1) + origin(f2) = origin(f3) where f3 exists.
struct EstimateInput {
  std::vector<SpaceTimeField> fields;
  std::vector<Frame> frames;
  double t0 = 0.0;
  double mu_sign = 1.0;
};

EstimateSample check_estimate(EstimateId id, const DyadicParams& params, const EstimateInput& input,
                              const RegimeScale& regime = {}, std::uint64_t seed = 0);

/// Draws the fields of one random sample for a frequency-side estimate.
EstimateInput draw_estimate_input(EstimateId id, const DyadicParams& params, FunctionFamily family,
                                  std::uint64_t seed, const RegimeScale& regime = {});

/// Alternating ascent on the convolution estimates: each step replaces f1,
/// f2, f3 in turn by the maximiser of the form with the other two fixed,
/// restricted to its own support. For HILOW_RED the third function is the
/// restriction of f1 * f2 to D_{k3,<=k3}. Other estimates are returned as is.
EstimateInput ascend_estimate_input(EstimateId id, const DyadicParams& params, EstimateInput input, int steps);

struct SweepConfig {
  EstimateId id = EstimateId::L3Z_A;
  /// Values swept for k1, k2, k3, j1, j2, j3 (empty list = {0}).
  std::vector<int> ranges[6];
  /// Explicit cell list; when nonempty it replaces the product of ranges.
  std::vector<DyadicParams> cells;
  std::size_t samples_per_cell = 200;
  FunctionFamily family = FunctionFamily::random_nonneg;
  std::uint64_t seed = 1;
  RegimeScale regime;
  /// Solver-side settings for TRI_A / TRI_B.
  double tri_time = 1.0 / 32.0;
  /// ascend_estimate_input steps applied to every drawn sample.
  int ascent_steps = 0;
  /// Slope above which a parameter is flagged.
  double slope_flag = 0.1;
  /// Worker threads; results do not depend on it.
  std::size_t threads = 1;
};

struct SweepCell {
  DyadicParams params;
  std::size_t samples = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double max_tail_fraction = 0.0;
};

struct SweepReport {
  EstimateId id = EstimateId::L3Z_A;
  std::vector<SweepCell> cells;
  std::vector<EstimateSample> samples;
  /// Cells dropped because they violate the hypotheses, with the reason.
  std::vector<std::pair<DyadicParams, std::string>> skipped;
  double global_max = 0.0;
  /// Least-squares slope of log2(max ratio) against each swept parameter.
  std::map<std::string, double> slopes;
  std::vector<std::string> flagged;

  std::string to_json() const;
};

SweepReport run_sweep(const SweepConfig& config);

/// Cells of a sweep in deterministic order, hypothesis violations separated out.
std::vector<DyadicParams> sweep_cells(const SweepConfig& config,
                                      std::vector<std::pair<DyadicParams, std::string>>* skipped = nullptr);

/// Least-squares slope of y against each column of x taken on its own.
/// Returns one slope per column (0 for constant columns).
std::vector<double> regression_slopes(const std::vector<std::vector<double>>& x, const std::vector<double>& y);

std::string csv_header();
std::string to_csv_row(const EstimateSample& s);

enum class TrilinearVariant { TRI_A, TRI_B };

/// Space-time trilinear integrals on solver output.
/// TRI_A: |int P_{k1}u1 P_{k2}u2 P_{k3}u3| against 2^{-k_min/2} prod F_{k_i}.
/// TRI_B: |int P_k u d_x P_k(u P_{k1} v)| against
/// 2^{k1/2} F_{k1}(P_{k1} v) sum_{|k'-k| <= g1} F_{k'}(P_{k'} u)^2; k1 = 0 uses P_{<=0}.
/// For TRI_A u = {u1, u2, u3}; for TRI_B u = {u, v}. All series share one time grid.
EstimateSample solution_trilinear(const std::vector<TimeSeries>& u, const DyadicParams& params,
                                  TrilinearVariant variant, const RegimeScale& regime = {});

}  // namespace kpi
