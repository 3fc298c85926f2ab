#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kpi {

/// Unnormalised 2D real<->half-complex DFT backed by FFTW.
///
/// The half spectrum has nx * (ny/2 + 1) entries, index a * (ny/2 + 1) + b, with
/// x-mode a in FFT order and y-mode b in [0, ny/2]. Plans are created with
/// FFTW_ESTIMATE so results are reproducible run to run. One instance must not
/// be used from two threads at once.
class RealFft2D {
 public:
  RealFft2D(std::size_t nx, std::size_t ny);
  ~RealFft2D();
  RealFft2D(const RealFft2D&) = delete;
  RealFft2D& operator=(const RealFft2D&) = delete;

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t half_size() const noexcept { return nx_ * (ny_ / 2 + 1); }

  /// out[k] = sum_x in[x] e^{-2 pi i k.x / N}
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// out[x] = sum_k in[k] e^{+2 pi i k.x / N}, Hermitian extension implied.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t nx_, ny_;
  double* real_ = nullptr;
  void* half_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

/// Unnormalised multi-dimensional complex DFT (row-major dims).
class ComplexFft {
 public:
  explicit ComplexFft(std::vector<int> dims);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const noexcept { return size_; }
  const std::vector<int>& dims() const noexcept { return dims_; }

  /// sign = -1: e^{-2 pi i k.x/N};  sign = +1: e^{+2 pi i k.x/N}. In place.
  void execute(std::span<std::complex<double>> data, int sign);

 private:
  std::vector<int> dims_;
  std::size_t size_;
  void* buf_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

/// Per-thread cached transforms, for free functions that do not own a plan.
RealFft2D& cached_real_fft(std::size_t nx, std::size_t ny);
ComplexFft& cached_complex_fft(const std::vector<int>& dims);

}  // namespace kpi
