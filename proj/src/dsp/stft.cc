#include "cabinsep/dsp/stft.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {
constexpr double kNormFloor = 1e-8;
}

void StftConfig::Validate() const {
  if (hop == 0 || hop > window_length || window_length > fft_size)
    throw InvalidConfig("STFT config requires 0 < hop <= window_length <= fft_size");
}

std::vector<double> AnalysisWindow(const StftConfig &cfg) {
  std::vector<double> w(cfg.window_length);
  const double n = static_cast<double>(cfg.window_length);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

std::size_t NumFrames(std::size_t num_samples, const StftConfig &cfg) {
  return (num_samples + cfg.hop - 1) / cfg.hop;
}

ComplexSpectrogram Analyze(const MultichannelWaveform &w,
                           const StftConfig &cfg) {
  cfg.Validate();
  w.Validate();
  if (w.Empty()) throw InvalidInput("cannot analyze an empty waveform");

  const std::size_t n = w.NumSamples();
  const std::size_t frames = NumFrames(n, cfg);
  const auto window = AnalysisWindow(cfg);
  ComplexSpectrogram spec(w.NumChannels(), frames, cfg.bins());
  RealFft fft(cfg.fft_size);
  std::vector<double> buf(cfg.fft_size);

  for (std::size_t z = 0; z < w.NumChannels(); ++z) {
    const auto &x = w.channels[z];
    for (std::size_t t = 0; t < frames; ++t) {
      std::fill(buf.begin(), buf.end(), 0.0);
      const std::size_t start = t * cfg.hop;
      const std::size_t stop = std::min(n, start + cfg.window_length);
      for (std::size_t i = start; i < stop; ++i)
        buf[i - start] = x[i] * window[i - start];
      fft.Forward(buf, spec.Frame(z, t));
    }
  }
  return spec;
}

MultichannelWaveform Synthesize(const ComplexSpectrogram &spec,
                                const StftConfig &cfg,
                                std::optional<std::size_t> length,
                                int sample_rate) {
  cfg.Validate();
  if (spec.bins() != cfg.bins())
    throw InvalidConfig("spectrogram bin count does not match the STFT config");

  const std::size_t frames = spec.frames();
  const std::size_t out_len = length.value_or(frames * cfg.hop);
  const std::size_t span =
      frames == 0 ? 0 : (frames - 1) * cfg.hop + cfg.window_length;
  const auto window = AnalysisWindow(cfg);

  std::vector<double> norm(span, 0.0);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < cfg.window_length; ++i)
      norm[t * cfg.hop + i] += window[i] * window[i];

  MultichannelWaveform out(spec.channels(), out_len, sample_rate);
  RealFft fft(cfg.fft_size);
  std::vector<double> buf(cfg.fft_size);
  std::vector<double> acc(span);
  for (std::size_t z = 0; z < spec.channels(); ++z) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      fft.Inverse(spec.Frame(z, t), buf);
      for (std::size_t i = 0; i < cfg.window_length; ++i)
        acc[t * cfg.hop + i] += buf[i] * window[i];
    }
    auto &y = out.channels[z];
    const std::size_t copy = std::min(out_len, span);
    for (std::size_t i = 0; i < copy; ++i)
      y[i] = acc[i] / std::max(norm[i], kNormFloor);
  }
  return out;
}

StreamingAnalyzer::StreamingAnalyzer(const StftConfig &cfg)
    : cfg_(cfg), window_(AnalysisWindow(cfg)), fft_(cfg.fft_size),
      scratch_(cfg.fft_size) {
  cfg_.Validate();
}

std::vector<Complex> StreamingAnalyzer::Emit() {
  std::fill(scratch_.begin(), scratch_.end(), 0.0);
  const std::size_t avail = std::min(pending_.size(), cfg_.window_length);
  for (std::size_t i = 0; i < avail; ++i)
    scratch_[i] = pending_[i] * window_[i];
  std::vector<Complex> frame(cfg_.bins());
  fft_.Forward(scratch_, frame);
  const std::size_t drop = std::min(cfg_.hop, pending_.size());
  pending_.erase(pending_.begin(), pending_.begin() + drop);
  ++emitted_frames_;
  return frame;
}

std::vector<std::vector<Complex>> StreamingAnalyzer::Push(
    std::span<const double> samples) {
  std::vector<std::vector<Complex>> frames;
  for (double s : samples) {
    pending_.push_back(s);
    ++received_;
    if (pending_.size() == cfg_.window_length) frames.push_back(Emit());
  }
  return frames;
}

std::vector<std::vector<Complex>> StreamingAnalyzer::Flush() {
  std::vector<std::vector<Complex>> frames;
  const std::size_t total = NumFrames(received_, cfg_);
  while (emitted_frames_ < total) frames.push_back(Emit());
  pending_.clear();
  return frames;
}

StreamingSynthesizer::StreamingSynthesizer(const StftConfig &cfg)
    : cfg_(cfg), window_(AnalysisWindow(cfg)), fft_(cfg.fft_size),
      acc_(cfg.window_length, 0.0), norm_(cfg.window_length, 0.0),
      scratch_(cfg.fft_size) {
  cfg_.Validate();
}

std::vector<double> StreamingSynthesizer::Push(std::span<const Complex> frame) {
  if (frame.size() != cfg_.bins())
    throw InvalidConfig("frame bin count does not match the STFT config");
  fft_.Inverse(frame, scratch_);
  for (std::size_t i = 0; i < cfg_.window_length; ++i) {
    acc_[i] += scratch_[i] * window_[i];
    norm_[i] += window_[i] * window_[i];
  }
  std::vector<double> out(cfg_.hop);
  for (std::size_t i = 0; i < cfg_.hop; ++i)
    out[i] = acc_[i] / std::max(norm_[i], kNormFloor);
  std::shift_left(acc_.begin(), acc_.end(), cfg_.hop);
  std::shift_left(norm_.begin(), norm_.end(), cfg_.hop);
  std::fill(acc_.end() - cfg_.hop, acc_.end(), 0.0);
  std::fill(norm_.end() - cfg_.hop, norm_.end(), 0.0);
  return out;
}

std::vector<double> StreamingSynthesizer::Flush() {
  const std::size_t tail = cfg_.window_length - cfg_.hop;
  std::vector<double> out(tail);
  for (std::size_t i = 0; i < tail; ++i)
    out[i] = acc_[i] / std::max(norm_[i], kNormFloor);
  std::fill(acc_.begin(), acc_.end(), 0.0);
  std::fill(norm_.begin(), norm_.end(), 0.0);
  return out;
}

}  // namespace cabinsep
