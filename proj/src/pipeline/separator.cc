#include "cabinsep/pipeline/separator.h"

#include <algorithm>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

void CheckInput(const MultichannelWaveform &y, const ModelConfig &cfg,
                const StftConfig &stft) {
  y.Validate();
  if (y.NumChannels() != cfg.zones)
    throw InvalidInput("input has " + std::to_string(y.NumChannels()) +
                       " channels, the model expects " + std::to_string(cfg.zones));
  if (stft.bins() != cfg.bins)
    throw InvalidConfig("STFT bin count does not match the model");
}

}  // namespace

MultichannelWaveform BeamformWithMasks(const MultichannelWaveform &y,
                                       const MaskPair &masks,
                                       const SeparatorConfig &cfg,
                                       MvdrStats *stats) {
  y.Validate();
  const auto spec = Analyze(y, cfg.stft);
  const auto out = SeparateStream(spec, masks, cfg.mvdr, stats);
  return Synthesize(out, cfg.stft, y.NumSamples(), y.sample_rate);
}

SeparationResult Separate(const Network &net, const MultichannelWaveform &y,
                          const SeparatorConfig &cfg) {
  CheckInput(y, net.config(), cfg.stft);
  SeparationResult r;
  const auto spec = Analyze(y, cfg.stft);
  r.masks = Forward(net, spec, cfg.start);
  const auto out = SeparateStream(spec, r.masks, cfg.mvdr, &r.stats);
  r.zones = Synthesize(out, cfg.stft, y.NumSamples(), y.sample_rate);
  return r;
}

StreamingSeparator::StreamingSeparator(const Network &net,
                                       const SeparatorConfig &cfg)
    : net_(net), cfg_(cfg), zones_(net.config().zones),
      bins_(net.config().bins), model_(net, cfg.start),
      beamformer_(net.config().zones, net.config().bins, cfg.mvdr) {
  cfg_.stft.Validate();
  if (cfg_.stft.bins() != bins_)
    throw InvalidConfig("STFT bin count does not match the model");
  for (std::size_t z = 0; z < zones_; ++z) {
    analyzers_.emplace_back(cfg_.stft);
    synthesizers_.emplace_back(cfg_.stft);
  }
}

MultichannelWaveform StreamingSeparator::Process(
    std::vector<std::vector<std::vector<Complex>>> frames) {
  MultichannelWaveform out(zones_, 0, 16000);
  const std::size_t count = frames.empty() ? 0 : frames[0].size();
  std::vector<Complex> snapshot(zones_ * bins_), x(zones_ * bins_);
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t z = 0; z < zones_; ++z)
      std::copy(frames[z][t].begin(), frames[z][t].end(), snapshot.begin() + z * bins_);
    const auto masks = model_.Push(snapshot);
    beamformer_.Process(snapshot, masks.speech, masks.noise, x);
    for (std::size_t z = 0; z < zones_; ++z) {
      const auto samples = synthesizers_[z].Push(
          std::span<const Complex>(x).subspan(z * bins_, bins_));
      out.channels[z].insert(out.channels[z].end(), samples.begin(), samples.end());
    }
  }
  return out;
}

MultichannelWaveform StreamingSeparator::Take(MultichannelWaveform out) {
  const std::size_t allowed = received_ - std::min(received_, emitted_);
  const std::size_t n = std::min(out.NumSamples(), allowed);
  for (auto &ch : out.channels) ch.resize(n);
  emitted_ += n;
  return out;
}

MultichannelWaveform StreamingSeparator::Push(const MultichannelWaveform &chunk) {
  if (chunk.NumChannels() != zones_)
    throw InvalidInput("chunk channel count does not match the model");
  for (const auto &ch : chunk.channels)
    if (ch.size() != chunk.NumSamples()) throw InvalidInput("ragged chunk");
  std::vector<std::vector<std::vector<Complex>>> frames(zones_);
  for (std::size_t z = 0; z < zones_; ++z) frames[z] = analyzers_[z].Push(chunk.channels[z]);
  received_ += chunk.NumSamples();
  auto out = Process(std::move(frames));
  out.sample_rate = chunk.sample_rate;
  return Take(std::move(out));
}

MultichannelWaveform StreamingSeparator::Flush() {
  std::vector<std::vector<std::vector<Complex>>> frames(zones_);
  for (std::size_t z = 0; z < zones_; ++z) frames[z] = analyzers_[z].Flush();
  auto out = Process(std::move(frames));
  for (std::size_t z = 0; z < zones_; ++z) {
    const auto tail = synthesizers_[z].Flush();
    out.channels[z].insert(out.channels[z].end(), tail.begin(), tail.end());
  }
  return Take(std::move(out));
}

MvdrStats StreamingSeparator::stats() const {
  return {beamformer_.numerical_errors(), beamformer_.passthrough_count()};
}

}  // namespace cabinsep
