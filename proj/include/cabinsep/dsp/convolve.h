#ifndef CABINSEP_DSP_CONVOLVE_H_
#define CABINSEP_DSP_CONVOLVE_H_

#include <span>

#include "cabinsep/dsp/waveform.h"

namespace cabinsep {

// Full linear convolution, length x.size() + h.size() - 1. Short kernels use
// the direct sum, long ones an FFT of the next power of two.
Signal Convolve(std::span<const double> x, std::span<const double> h);

// Per-channel convolution of every channel of x with the same kernel.
MultichannelWaveform Convolve(const MultichannelWaveform &x,
                              std::span<const double> h);

// Circular convolution of two equal-length sequences.
Signal CircularConvolve(std::span<const double> a, std::span<const double> b);

}  // namespace cabinsep

#endif  // CABINSEP_DSP_CONVOLVE_H_
