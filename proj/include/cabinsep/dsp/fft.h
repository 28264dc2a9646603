#ifndef CABINSEP_DSP_FFT_H_
#define CABINSEP_DSP_FFT_H_

#include <complex>
#include <cstddef>
#include <span>

#include "cabinsep/dsp/waveform.h"

namespace cabinsep {

// Real-to-complex transform of arbitrary length backed by FFTW. An instance
// owns its plans and scratch buffers, so it must not be shared across
// threads; constructing one per call site is cheap (FFTW_ESTIMATE).
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // out has bins() entries. Unnormalized.
  void Forward(std::span<const double> in, std::span<Complex> out);
  // in has bins() entries; the imaginary parts of DC (and Nyquist for even
  // sizes) are ignored. Scaled by 1/size so Inverse(Forward(x)) == x.
  void Inverse(std::span<const Complex> in, std::span<double> out);

 private:
  std::size_t size_;
  double *real_ = nullptr;
  void *spec_ = nullptr;
  void *forward_ = nullptr;
  void *inverse_ = nullptr;
};

}  // namespace cabinsep

#endif  // CABINSEP_DSP_FFT_H_
