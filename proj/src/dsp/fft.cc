#include "cabinsep/dsp/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {
// The FFTW planner is not reentrant; execution on distinct plans is.
std::mutex &PlannerMutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size == 0) throw InvalidConfig("FFT size must be positive");
  std::lock_guard<std::mutex> lock(PlannerMutex());
  real_ = fftw_alloc_real(size_);
  auto *spec = fftw_alloc_complex(bins());
  spec_ = spec;
  const int n = static_cast<int>(size_);
  forward_ = fftw_plan_dft_r2c_1d(n, real_, spec, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(n, spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::Forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != size_ || out.size() != bins())
    throw InvalidInput("RealFft::Forward size mismatch");
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  auto *spec = static_cast<fftw_complex *>(spec_);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec[k][0], spec[k][1]};
}

void RealFft::Inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != bins() || out.size() != size_)
    throw InvalidInput("RealFft::Inverse size mismatch");
  auto *spec = static_cast<fftw_complex *>(spec_);
  for (std::size_t k = 0; k < bins(); ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  spec[0][1] = 0.0;
  if (size_ % 2 == 0) spec[bins() - 1][1] = 0.0;
  // c2r destroys its input, which is our own scratch.
  fftw_execute(static_cast<fftw_plan>(inverse_));
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = real_[i] * scale;
}

}  // namespace cabinsep
