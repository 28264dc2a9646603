#include "cabinsep/features/features.h"

#include <cmath>
#include <vector>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

std::vector<Complex> Snapshot(const ComplexSpectrogram &y, std::size_t t) {
  std::vector<Complex> frame(y.channels() * y.bins());
  for (std::size_t z = 0; z < y.channels(); ++z) {
    auto src = y.Frame(z, t);
    std::copy(src.begin(), src.end(), frame.begin() + z * y.bins());
  }
  return frame;
}

double Angle(Complex v) {
  return (v.real() == 0.0 && v.imag() == 0.0) ? 0.0 : std::arg(v);
}

}  // namespace

void StackRealImagFrame(std::span<const Complex> frame, std::size_t zones,
                        std::size_t bins, std::span<float> out) {
  for (std::size_t z = 0; z < zones; ++z) {
    for (std::size_t f = 0; f < bins; ++f) {
      const Complex v = frame[z * bins + f];
      out[z * bins + f] = static_cast<float>(v.real());
      out[(zones + z) * bins + f] = static_cast<float>(v.imag());
    }
  }
}

void LpsFrame(std::span<const Complex> frame, double floor,
              std::span<float> out) {
  for (std::size_t i = 0; i < frame.size(); ++i)
    out[i] = static_cast<float>(std::log(std::max(std::norm(frame[i]), floor)));
}

void IpdFrame(std::span<const Complex> a, std::span<const Complex> b,
              std::span<float> out) {
  const std::size_t bins = a.size();
  for (std::size_t f = 0; f < bins; ++f) {
    const double theta = Angle(a[f]) - Angle(b[f]);
    out[f] = static_cast<float>(std::cos(theta));
    out[bins + f] = static_cast<float>(std::sin(theta));
  }
}

FeatureTensor StackRealImag(const ComplexSpectrogram &y) {
  if (y.channels() == 0) throw InvalidInput("empty spectrogram");
  FeatureTensor out(2 * y.channels(), y.frames(), y.bins());
  for (std::size_t t = 0; t < y.frames(); ++t)
    StackRealImagFrame(Snapshot(y, t), y.channels(), y.bins(), out.Frame(t));
  return out;
}

FeatureTensor ComputeLps(const ComplexSpectrogram &y, double floor) {
  if (!(floor > 0.0)) throw InvalidConfig("LPS floor must be positive");
  if (y.channels() == 0) throw InvalidInput("empty spectrogram");
  FeatureTensor out(y.channels(), y.frames(), y.bins());
  for (std::size_t t = 0; t < y.frames(); ++t)
    LpsFrame(Snapshot(y, t), floor, out.Frame(t));
  return out;
}

FeatureTensor ComputeIpd(const ComplexSpectrogram &y, std::size_t mic_a,
                         std::size_t mic_b) {
  if (mic_a == mic_b || mic_a >= y.channels() || mic_b >= y.channels())
    throw InvalidInput("IPD needs two distinct in-range microphones");
  FeatureTensor out(2, y.frames(), y.bins());
  for (std::size_t t = 0; t < y.frames(); ++t)
    IpdFrame(y.Frame(mic_a, t), y.Frame(mic_b, t), out.Frame(t));
  return out;
}

}  // namespace cabinsep
