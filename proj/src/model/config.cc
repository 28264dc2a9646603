#include "cabinsep/model/config.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

struct PresetFields {
  std::size_t n_full_sub, tac_compression, conformer_layers;
};

std::optional<PresetFields> PresetFor(const std::string &variant) {
  if (variant == "S") return PresetFields{1, 4, 4};
  if (variant == "M") return PresetFields{2, 4, 2};
  if (variant == "L") return PresetFields{3, 2, 2};
  return std::nullopt;
}

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t ToSize(const std::string &key, const std::string &v) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception &) {
    throw InvalidConfig("config key '" + key + "' expects a non-negative integer");
  }
}

double ToDouble(const std::string &key, const std::string &v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception &) {
    throw InvalidConfig("config key '" + key + "' expects a number");
  }
}

bool ToBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidConfig("config key '" + key + "' expects true/false");
}

}  // namespace

std::optional<std::size_t> ModelConfig::lookback_frames() const {
  if (!chunk_lookback_seconds) return std::nullopt;
  return static_cast<std::size_t>(
      std::floor(*chunk_lookback_seconds / hop_seconds + 1e-9));
}

void ModelConfig::Validate() const {
  if (zones == 0) throw InvalidConfig("zones must be positive");
  if (n_full_sub == 0) throw InvalidConfig("n_full_sub must be positive");
  if (embed_channels == 0 || subband_hidden == 0 || ff_dim == 0 ||
      encoder_channels == 0 || bins == 0 || conv_kernel == 0)
    throw InvalidConfig("layer widths must be positive");
  if (tac_compression == 0 || embed_channels % tac_compression != 0)
    throw InvalidConfig("embed_channels must be divisible by tac_compression");
  if (attn_heads == 0 || subband_hidden % attn_heads != 0)
    throw InvalidConfig("subband_hidden must be divisible by attn_heads");
  if (!(hop_seconds > 0.0)) throw InvalidConfig("hop_seconds must be positive");
  if (chunk_lookback_seconds && !(*chunk_lookback_seconds > 0.0))
    throw InvalidConfig("chunk_lookback_seconds must be positive");
  if (auto p = PresetFor(variant)) {
    if (p->n_full_sub != n_full_sub || p->tac_compression != tac_compression ||
        p->conformer_layers != conformer_layers)
      throw InvalidConfig("fields disagree with preset " + variant);
  } else if (variant != "custom") {
    throw InvalidConfig("unknown variant '" + variant + "'");
  }
}

std::string ModelConfig::Fingerprint() const {
  std::ostringstream os;
  os << "Z=" << zones << ";N=" << n_full_sub << ";C=" << embed_channels
     << ";H=" << subband_hidden << ";d=" << tac_compression
     << ";layers=" << conformer_layers << ";heads=" << attn_heads
     << ";ff=" << ff_dim << ";enc=" << encoder_channels
     << ";kernel=" << conv_kernel << ";F=" << bins;
  return os.str();
}

ModelConfig ModelConfig::Preset(const std::string &variant) {
  auto p = PresetFor(variant);
  if (!p) throw InvalidConfig("unknown variant '" + variant + "'");
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.n_full_sub = p->n_full_sub;
  cfg.tac_compression = p->tac_compression;
  cfg.conformer_layers = p->conformer_layers;
  return cfg;
}

ModelConfig ParseModelConfig(const std::string &text) {
  ModelConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto before = cfg;
    if (key == "variant") {
      cfg = value == "custom" ? cfg : ModelConfig::Preset(value);
      cfg.variant = value;
      continue;
    }
    if (key == "zones") cfg.zones = ToSize(key, value);
    else if (key == "n_full_sub") cfg.n_full_sub = ToSize(key, value);
    else if (key == "embed_channels") cfg.embed_channels = ToSize(key, value);
    else if (key == "subband_hidden") cfg.subband_hidden = ToSize(key, value);
    else if (key == "tac_compression") cfg.tac_compression = ToSize(key, value);
    else if (key == "conformer_layers") cfg.conformer_layers = ToSize(key, value);
    else if (key == "attn_heads") cfg.attn_heads = ToSize(key, value);
    else if (key == "ff_dim") cfg.ff_dim = ToSize(key, value);
    else if (key == "encoder_channels") cfg.encoder_channels = ToSize(key, value);
    else if (key == "conv_kernel") cfg.conv_kernel = ToSize(key, value);
    else if (key == "bins") cfg.bins = ToSize(key, value);
    else if (key == "hop_seconds") cfg.hop_seconds = ToDouble(key, value);
    else if (key == "time_skip") cfg.time_skip = ToBool(key, value);
    else if (key == "chunk_lookback_seconds") {
      if (value == "none") cfg.chunk_lookback_seconds.reset();
      else cfg.chunk_lookback_seconds = ToDouble(key, value);
    } else {
      throw InvalidConfig("unknown config key '" + key + "'");
    }
    if (PresetFor(cfg.variant) &&
        (cfg.n_full_sub != before.n_full_sub ||
         cfg.tac_compression != before.tac_compression ||
         cfg.conformer_layers != before.conformer_layers))
      cfg.variant = "custom";
  }
  cfg.Validate();
  return cfg;
}

ModelConfig LoadModelConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseModelConfig(ss.str());
}

std::string FormatModelConfig(const ModelConfig &cfg) {
  std::ostringstream os;
  os << "variant = " << cfg.variant << "\n"
     << "zones = " << cfg.zones << "\n"
     << "n_full_sub = " << cfg.n_full_sub << "\n"
     << "embed_channels = " << cfg.embed_channels << "\n"
     << "subband_hidden = " << cfg.subband_hidden << "\n"
     << "tac_compression = " << cfg.tac_compression << "\n"
     << "conformer_layers = " << cfg.conformer_layers << "\n"
     << "attn_heads = " << cfg.attn_heads << "\n"
     << "ff_dim = " << cfg.ff_dim << "\n"
     << "encoder_channels = " << cfg.encoder_channels << "\n"
     << "conv_kernel = " << cfg.conv_kernel << "\n"
     << "bins = " << cfg.bins << "\n"
     << "hop_seconds = " << cfg.hop_seconds << "\n"
     << "time_skip = " << (cfg.time_skip ? "true" : "false") << "\n"
     << "chunk_lookback_seconds = ";
  if (cfg.chunk_lookback_seconds) os << *cfg.chunk_lookback_seconds;
  else os << "none";
  os << "\n";
  return os.str();
}

}  // namespace cabinsep
