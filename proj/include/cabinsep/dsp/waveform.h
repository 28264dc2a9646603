#ifndef CABINSEP_DSP_WAVEFORM_H_
#define CABINSEP_DSP_WAVEFORM_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cabinsep {

using Signal = std::vector<double>;
using Complex = std::complex<double>;

// Z time-domain channels of equal length; channel i is the microphone of
// zone i + 1.
struct MultichannelWaveform {
  int sample_rate = 16000;
  std::vector<Signal> channels;

  MultichannelWaveform() = default;
  MultichannelWaveform(std::size_t num_channels, std::size_t num_samples,
                       int rate = 16000)
      : sample_rate(rate), channels(num_channels, Signal(num_samples, 0.0)) {}

  static MultichannelWaveform Mono(Signal samples, int rate = 16000) {
    MultichannelWaveform w;
    w.sample_rate = rate;
    w.channels.push_back(std::move(samples));
    return w;
  }

  std::size_t NumChannels() const { return channels.size(); }
  std::size_t NumSamples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  bool Empty() const { return NumChannels() == 0 || NumSamples() == 0; }
  double Duration() const {
    return static_cast<double>(NumSamples()) / sample_rate;
  }

  // Throws InvalidInput on ragged channels, zero channels or a bad rate.
  void Validate() const;
};

// Z x T x F one-sided complex spectrum, stored [z][t][f] so that one frame of
// one channel is contiguous.
class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(std::size_t channels, std::size_t frames,
                     std::size_t bins)
      : channels_(channels), frames_(frames), bins_(bins),
        data_(channels * frames * bins) {}

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }

  Complex &at(std::size_t z, std::size_t t, std::size_t f) {
    return data_[(z * frames_ + t) * bins_ + f];
  }
  const Complex &at(std::size_t z, std::size_t t, std::size_t f) const {
    return data_[(z * frames_ + t) * bins_ + f];
  }

  std::span<Complex> Frame(std::size_t z, std::size_t t) {
    return {data_.data() + (z * frames_ + t) * bins_, bins_};
  }
  std::span<const Complex> Frame(std::size_t z, std::size_t t) const {
    return {data_.data() + (z * frames_ + t) * bins_, bins_};
  }

  std::vector<Complex> &data() { return data_; }
  const std::vector<Complex> &data() const { return data_; }

  // First `frames` frames of every channel.
  ComplexSpectrogram Prefix(std::size_t frames) const;

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::vector<Complex> data_;
};

double Power(std::span<const double> x);

}  // namespace cabinsep

#endif  // CABINSEP_DSP_WAVEFORM_H_
