#include "cabinsep/dsp/waveform.h"

#include <algorithm>

#include "cabinsep/common.h"

namespace cabinsep {

void MultichannelWaveform::Validate() const {
  if (channels.empty()) throw InvalidInput("waveform has no channels");
  if (sample_rate <= 0) throw InvalidInput("sample rate must be positive");
  const std::size_t n = channels.front().size();
  for (const auto &c : channels) {
    if (c.size() != n) throw InvalidInput("waveform channels differ in length");
  }
}

ComplexSpectrogram ComplexSpectrogram::Prefix(std::size_t frames) const {
  frames = std::min(frames, frames_);
  ComplexSpectrogram out(channels_, frames, bins_);
  for (std::size_t z = 0; z < channels_; ++z) {
    for (std::size_t t = 0; t < frames; ++t) {
      auto src = Frame(z, t);
      std::copy(src.begin(), src.end(), out.Frame(z, t).begin());
    }
  }
  return out;
}

double Power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace cabinsep
