#include "fft.hpp"

#include <algorithm>
#include <stdexcept>

namespace orbitinv::detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

RealFft::RealFft(std::size_t n0, std::size_t n1) : n0_(n0), n1_(n1) {
  std::lock_guard lock(fftw_planner_mutex());
  real_ = fftw_alloc_real(n0 * n1);
  spec_ = fftw_alloc_complex(spectrum_size());
  if (real_ == nullptr || spec_ == nullptr) throw std::bad_alloc();
  const int d0 = static_cast<int>(n0);
  const int d1 = static_cast<int>(n1);
  if (n0 == 1) {
    fwd_ = fftw_plan_dft_r2c_1d(d1, real_, spec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(d1, spec_, real_, FFTW_ESTIMATE);
  } else {
    fwd_ = fftw_plan_dft_r2c_2d(d0, d1, real_, spec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(d0, d1, spec_, real_, FFTW_ESTIMATE);
  }
}

RealFft::~RealFft() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(inv_);
  fftw_free(real_);
  fftw_free(spec_);
}

std::vector<std::complex<double>> RealFft::forward(const std::vector<double>& in) {
  if (in.size() != n0_ * n1_) throw std::invalid_argument("RealFft::forward: size mismatch");
  std::copy(in.begin(), in.end(), real_);
  fftw_execute_dft_r2c(fwd_, real_, spec_);
  std::vector<std::complex<double>> out(spectrum_size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
  return out;
}

std::vector<double> RealFft::inverse(const std::vector<std::complex<double>>& in) {
  if (in.size() != spectrum_size()) throw std::invalid_argument("RealFft::inverse: size mismatch");
  for (std::size_t k = 0; k < in.size(); ++k) {
    spec_[k][0] = in[k].real();
    spec_[k][1] = in[k].imag();
  }
  // c2r destroys its input; spec_ is scratch here.
  fftw_execute_dft_c2r(inv_, spec_, real_);
  const double scale = 1.0 / static_cast<double>(n0_ * n1_);
  std::vector<double> out(n0_ * n1_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = real_[k] * scale;
  return out;
}

}  // namespace orbitinv::detail
