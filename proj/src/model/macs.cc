#include "cabinsep/model/macs.h"

#include <algorithm>
#include <cmath>

#include "cabinsep/common.h"
#include "cabinsep/model/weights.h"

namespace cabinsep {

std::uint64_t MacReport::total() const {
  std::uint64_t sum = 0;
  for (const auto &item : items) sum += item.macs;
  return sum;
}

std::uint64_t MacReport::Matching(const std::string &fragment) const {
  std::uint64_t sum = 0;
  for (const auto &item : items)
    if (item.layer.find(fragment) != std::string::npos) sum += item.macs;
  return sum;
}

MacReport CountMacs(const ModelConfig &cfg, double seconds, std::size_t start) {
  cfg.Validate();
  if (!(seconds > 0.0)) throw InvalidInput("seconds must be positive");
  using U = std::uint64_t;
  MacReport r;
  r.seconds = seconds;
  const U t = static_cast<U>(std::ceil(seconds / cfg.hop_seconds - 1e-9));
  r.frames = t;
  const U f = cfg.bins, z = cfg.zones, e = cfg.encoder_channels,
          c = cfg.embed_channels, h = cfg.subband_hidden, ff = cfg.ff_dim,
          hid = cfg.lstm_hidden(), cd = cfg.tac_channels(), k = cfg.conv_kernel;
  auto add = [&](std::string name, U macs) { r.items.push_back({std::move(name), macs}); };

  const U tf = t * f;
  add("encoder.spec", (e * 2 * z * 9 + e * e * 9) * tf);
  add("encoder.lps", (e * z * 9 + e * e * 9) * tf);
  add("encoder.ipd", (e * 2 * 9 + e * e * 9) * tf);
  add("encoder.merge", c * 3 * e * tf);

  // Attention context at frame i is min(i + 1, lookback + 1) cached frames.
  U context = 0;
  const auto lookback = cfg.lookback_frames();
  for (U i = 0; i < t; ++i)
    context += lookback ? std::min<U>(i + 1, *lookback + 1) : i + 1;

  const U tac_frames = cfg.time_skip ? (t > start ? (t - start + 1) / 2 : 0) : t;
  for (std::size_t n = 0; n < cfg.n_full_sub; ++n) {
    const std::string m = "fullsub." + std::to_string(n);
    add(m + ".lstm", (c * f * hid + 4 * hid * 2 * hid + hid * c * f) * t);
    add(m + ".tac", (2 * c * cd + 2 * cd * c) * f * tac_frames);
    add(m + ".subband.proj", 2 * c * h * tf);
    for (std::size_t l = 0; l < cfg.conformer_layers; ++l) {
      const std::string b = m + ".subband.block." + std::to_string(l);
      add(b + ".ff", 4 * h * ff * tf);
      add(b + ".attn.proj", 4 * h * h * tf);
      add(b + ".attn.scores", 2 * h * context * f);
      add(b + ".conv", (2 * h * h + h * k + h * h) * tf);
    }
  }
  add("decoder", c * z * 9 * tf);
  add("mask", 2 * z * z * tf);
  return r;
}

std::uint64_t CountParameters(const ModelConfig &cfg) {
  std::uint64_t n = 0;
  for (const auto &spec : RequiredTensors(cfg)) {
    std::uint64_t size = 1;
    for (auto d : spec.shape) size *= d;
    n += size;
  }
  return n;
}

}  // namespace cabinsep
