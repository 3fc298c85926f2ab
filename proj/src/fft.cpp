#include "kpi/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "kpi/error.hpp"

namespace kpi {
namespace {

// The FFTW planner is not re-entrant; execution with existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft2D::RealFft2D(std::size_t nx, std::size_t ny) : nx_(nx), ny_(ny) {
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(nx * ny);
  auto* half = fftw_alloc_complex(half_size());
  half_ = half;
  fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(nx), static_cast<int>(ny), real_, half, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_2d(static_cast<int>(nx), static_cast<int>(ny), half, real_, FFTW_ESTIMATE);
  if (fwd_ == nullptr || inv_ == nullptr) throw NumericalError("FFTW failed to create a real 2D plan");
}

RealFft2D::~RealFft2D() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(real_);
  fftw_free(half_);
}

void RealFft2D::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  std::memcpy(out.data(), half_, half_size() * sizeof(fftw_complex));
}

void RealFft2D::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  // c2r overwrites its input, so always work from the internal copy.
  std::memcpy(half_, in.data(), half_size() * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(inv_));
  std::copy(real_, real_ + nx_ * ny_, out.begin());
}

ComplexFft::ComplexFft(std::vector<int> dims) : dims_(std::move(dims)), size_(1) {
  for (int d : dims_) size_ *= static_cast<std::size_t>(d);
  std::lock_guard lock(planner_mutex());
  auto* buf = fftw_alloc_complex(size_);
  buf_ = buf;
  const int rank = static_cast<int>(dims_.size());
  fwd_ = fftw_plan_dft(rank, dims_.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft(rank, dims_.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (fwd_ == nullptr || inv_ == nullptr) throw NumericalError("FFTW failed to create a complex plan");
}

ComplexFft::~ComplexFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(buf_);
}

void ComplexFft::execute(std::span<std::complex<double>> data, int sign) {
  if (data.size() != size_) throw ContractError("complex FFT buffer size mismatch");
  std::memcpy(buf_, data.data(), size_ * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(sign < 0 ? fwd_ : inv_));
  std::memcpy(data.data(), buf_, size_ * sizeof(fftw_complex));
}

RealFft2D& cached_real_fft(std::size_t nx, std::size_t ny) {
  thread_local std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<RealFft2D>> cache;
  auto& slot = cache[{nx, ny}];
  if (!slot) slot = std::make_unique<RealFft2D>(nx, ny);
  return *slot;
}

ComplexFft& cached_complex_fft(const std::vector<int>& dims) {
  thread_local std::map<std::vector<int>, std::unique_ptr<ComplexFft>> cache;
  auto& slot = cache[dims];
  if (!slot) slot = std::make_unique<ComplexFft>(dims);
  return *slot;
}

}  // namespace kpi
