#pragma once

// Thin RAII layer over FFTW. Plan creation and destruction go through one
// mutex (the FFTW planner is not reentrant); execution is thread-safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

namespace orbitinv::detail {

std::mutex& fftw_planner_mutex();

/// Real-to-complex forward transform of an n0 x n1 row-major array (n0 = 1
/// for 1D). Output has n0 x (n1/2 + 1) entries.
class RealFft {
 public:
  RealFft(std::size_t n0, std::size_t n1);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::vector<std::complex<double>> forward(const std::vector<double>& in);
  /// Inverse of forward, including the 1/(n0 n1) normalisation.
  std::vector<double> inverse(const std::vector<std::complex<double>>& in);

  std::size_t spectrum_size() const { return n0_ * (n1_ / 2 + 1); }

 private:
  std::size_t n0_, n1_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace orbitinv::detail
