#ifndef CABINSEP_MODEL_CONFIG_H_
#define CABINSEP_MODEL_CONFIG_H_

#include <cstddef>
#include <optional>
#include <string>

namespace cabinsep {

// Hyper-parameters of the mask estimation network. The S/M/L presets differ
// only in the number of full-sub modules, the TAC compression ratio and the
// conformer depth; everything else is shared.
struct ModelConfig {
  std::string variant = "S";        // "S", "M", "L" or "custom"
  std::size_t zones = 4;            // Z
  std::size_t n_full_sub = 1;       // N
  std::size_t embed_channels = 24;  // C
  std::size_t subband_hidden = 16;  // H
  std::size_t tac_compression = 4;  // d
  std::size_t conformer_layers = 4;
  std::size_t attn_heads = 4;
  std::size_t ff_dim = 8;
  std::size_t encoder_channels = 8;
  std::size_t conv_kernel = 3;  // depthwise kernel inside the conformer
  std::size_t bins = 257;
  double hop_seconds = 0.016;
  bool time_skip = true;
  std::optional<double> chunk_lookback_seconds;

  std::size_t lstm_hidden() const { return 4 * embed_channels; }
  std::size_t tac_channels() const { return embed_channels / tac_compression; }
  // Past frames visible to attention; nullopt means unbounded.
  std::optional<std::size_t> lookback_frames() const;

  // Throws InvalidConfig on divisibility violations or a preset label whose
  // fields disagree with the preset.
  void Validate() const;

  // Shape-relevant fields in a stable textual form; stored in weight files.
  std::string Fingerprint() const;

  static ModelConfig Preset(const std::string &variant);
};

// key = value text, '#' starts a comment. A `variant` key applies the preset
// first; later keys override it (and relabel the config "custom" if they
// change a preset-defining field).
ModelConfig ParseModelConfig(const std::string &text);
ModelConfig LoadModelConfig(const std::string &path);
std::string FormatModelConfig(const ModelConfig &cfg);

}  // namespace cabinsep

#endif  // CABINSEP_MODEL_CONFIG_H_
