#ifndef CABINSEP_DSP_STFT_H_
#define CABINSEP_DSP_STFT_H_

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "cabinsep/dsp/fft.h"
#include "cabinsep/dsp/waveform.h"

namespace cabinsep {

enum class WindowKind { kHamming };

// Defaults: 512-point FFT, 32 ms Hamming window, 16 ms hop at 16 kHz.
struct StftConfig {
  std::size_t fft_size = 512;
  std::size_t window_length = 512;
  std::size_t hop = 256;
  WindowKind window_kind = WindowKind::kHamming;

  std::size_t bins() const { return fft_size / 2 + 1; }
  // Throws InvalidConfig unless 0 < hop <= window_length <= fft_size.
  void Validate() const;
};

// Periodic Hamming window of cfg.window_length taps.
std::vector<double> AnalysisWindow(const StftConfig &cfg);

// Number of frames for a signal of `num_samples`: ceil(num_samples / hop).
std::size_t NumFrames(std::size_t num_samples, const StftConfig &cfg);

// Frame t covers samples [t*hop, t*hop + window_length), zero-padded past the
// end of the signal and up to fft_size.
ComplexSpectrogram Analyze(const MultichannelWaveform &w,
                           const StftConfig &cfg);

// Windowed overlap-add divided by the summed squared window (floored at
// 1e-8). Output length defaults to frames * hop. The imaginary parts of the DC
// and Nyquist bins are dropped before inversion.
MultichannelWaveform Synthesize(const ComplexSpectrogram &spec,
                                const StftConfig &cfg,
                                std::optional<std::size_t> length = {},
                                int sample_rate = 16000);

// Push-based analysis for one channel. Emits frame t once samples up to
// t*hop + window_length - 1 have arrived; Flush() zero-pads the tail so the
// emitted frames match Analyze() exactly.
class StreamingAnalyzer {
 public:
  explicit StreamingAnalyzer(const StftConfig &cfg);

  // Appends samples; returns every frame completed by them.
  std::vector<std::vector<Complex>> Push(std::span<const double> samples);
  std::vector<std::vector<Complex>> Flush();

 private:
  std::vector<Complex> Emit();

  StftConfig cfg_;
  std::vector<double> window_;
  RealFft fft_;
  std::deque<double> pending_;
  std::size_t received_ = 0;
  std::size_t emitted_frames_ = 0;
  std::vector<double> scratch_;
};

// Push-based overlap-add for one channel. Each pushed frame finalizes `hop`
// output samples (those no later frame can touch); Flush() releases the rest.
class StreamingSynthesizer {
 public:
  explicit StreamingSynthesizer(const StftConfig &cfg);

  std::vector<double> Push(std::span<const Complex> frame);
  std::vector<double> Flush();

 private:
  StftConfig cfg_;
  std::vector<double> window_;
  RealFft fft_;
  std::vector<double> acc_;
  std::vector<double> norm_;
  std::vector<double> scratch_;
};

}  // namespace cabinsep

#endif  // CABINSEP_DSP_STFT_H_
