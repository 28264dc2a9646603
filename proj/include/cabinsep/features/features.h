#ifndef CABINSEP_FEATURES_FEATURES_H_
#define CABINSEP_FEATURES_FEATURES_H_

#include <cstddef>
#include <span>

#include "cabinsep/dsp/waveform.h"
#include "cabinsep/tensor.h"

namespace cabinsep {

using FeatureTensor = Tensor3;

constexpr double kDefaultLpsFloor = 1e-10;

// 2Z channels: [0, Z) real parts, [Z, 2Z) imaginary parts.
FeatureTensor StackRealImag(const ComplexSpectrogram &y);

// log(max(|Y|^2, floor)), Z channels. Throws InvalidConfig if floor <= 0.
FeatureTensor ComputeLps(const ComplexSpectrogram &y,
                         double floor = kDefaultLpsFloor);

// [cos, sin] of the phase difference angle(Y_a) - angle(Y_b). Bins where
// either channel is exactly zero have angle 0 by convention.
FeatureTensor ComputeIpd(const ComplexSpectrogram &y, std::size_t mic_a = 0,
                         std::size_t mic_b = 1);

// Per-frame kernels used by the streaming model. `frame` holds the Z x F
// snapshot of one time step, channel-major; outputs are channel-major too.
void StackRealImagFrame(std::span<const Complex> frame, std::size_t zones,
                        std::size_t bins, std::span<float> out);
void LpsFrame(std::span<const Complex> frame, double floor,
              std::span<float> out);
void IpdFrame(std::span<const Complex> a, std::span<const Complex> b,
              std::span<float> out);

}  // namespace cabinsep

#endif  // CABINSEP_FEATURES_FEATURES_H_
