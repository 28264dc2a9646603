#include "cabinsep/model/weights.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

constexpr char kMagic[] = "CABINSEP-WEIGHTS 1";

static_assert(std::endian::native == std::endian::little,
              "weight payload is written in host order");

void AddLinear(std::vector<TensorSpec> &specs, const std::string &prefix,
               std::size_t out, std::size_t in) {
  specs.push_back({prefix + ".weight", {out, in}, in});
  specs.push_back({prefix + ".bias", {out}, in});
}

void AddConv(std::vector<TensorSpec> &specs, const std::string &prefix,
             std::size_t out, std::size_t in, std::size_t kt, std::size_t kf) {
  specs.push_back({prefix + ".weight", {out, in, kt, kf}, in * kt * kf});
  specs.push_back({prefix + ".bias", {out}, in * kt * kf});
}

void AddNorm(std::vector<TensorSpec> &specs, const std::string &prefix,
             std::size_t dim) {
  specs.push_back({prefix + ".gamma", {dim}, 1, InitKind::kOnes});
  specs.push_back({prefix + ".beta", {dim}, 1, InitKind::kZeros});
}

void AddFeedForward(std::vector<TensorSpec> &specs, const std::string &prefix,
                    std::size_t h, std::size_t ff) {
  AddNorm(specs, prefix + ".norm", h);
  AddLinear(specs, prefix + ".linear1", ff, h);
  AddLinear(specs, prefix + ".linear2", h, ff);
}

}  // namespace

std::size_t WeightTensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::vector<TensorSpec> RequiredTensors(const ModelConfig &cfg) {
  cfg.Validate();
  const std::size_t z = cfg.zones, e = cfg.encoder_channels,
                    c = cfg.embed_channels, h = cfg.subband_hidden,
                    ff = cfg.ff_dim, f = cfg.bins, hid = cfg.lstm_hidden(),
                    cd = cfg.tac_channels();
  std::vector<TensorSpec> specs;
  AddConv(specs, "encoder.spec.conv1", e, 2 * z, 3, 3);
  AddConv(specs, "encoder.spec.conv2", e, e, 3, 3);
  AddConv(specs, "encoder.lps.conv1", e, z, 3, 3);
  AddConv(specs, "encoder.lps.conv2", e, e, 3, 3);
  AddConv(specs, "encoder.ipd.conv1", e, 2, 3, 3);
  AddConv(specs, "encoder.ipd.conv2", e, e, 3, 3);
  AddConv(specs, "encoder.merge", c, 3 * e, 1, 1);

  for (std::size_t n = 0; n < cfg.n_full_sub; ++n) {
    const std::string m = "fullsub." + std::to_string(n);
    AddLinear(specs, m + ".lstm.proj_in", hid, c * f);
    specs.push_back({m + ".lstm.weight_ih", {4 * hid, hid}, hid});
    specs.push_back({m + ".lstm.weight_hh", {4 * hid, hid}, hid});
    specs.push_back({m + ".lstm.bias_ih", {4 * hid}, hid});
    specs.push_back({m + ".lstm.bias_hh", {4 * hid}, hid});
    AddLinear(specs, m + ".lstm.proj_out", c * f, hid);

    AddLinear(specs, m + ".tac.linear_a", cd, c);
    AddLinear(specs, m + ".tac.linear_b", cd, c);
    AddLinear(specs, m + ".tac.linear_c", c, 2 * cd);

    AddLinear(specs, m + ".subband.proj_in", h, c);
    for (std::size_t l = 0; l < cfg.conformer_layers; ++l) {
      const std::string b = m + ".subband.block." + std::to_string(l);
      AddFeedForward(specs, b + ".ff1", h, ff);
      AddNorm(specs, b + ".attn.norm", h);
      AddLinear(specs, b + ".attn.q", h, h);
      AddLinear(specs, b + ".attn.k", h, h);
      AddLinear(specs, b + ".attn.v", h, h);
      AddLinear(specs, b + ".attn.out", h, h);
      AddNorm(specs, b + ".conv.norm", h);
      AddLinear(specs, b + ".conv.pw1", 2 * h, h);
      specs.push_back({b + ".conv.dw.weight", {h, cfg.conv_kernel}, cfg.conv_kernel});
      specs.push_back({b + ".conv.dw.bias", {h}, cfg.conv_kernel});
      specs.push_back({b + ".conv.bn.scale", {h}, 1, InitKind::kOnes});
      specs.push_back({b + ".conv.bn.shift", {h}, 1, InitKind::kZeros});
      AddLinear(specs, b + ".conv.pw2", h, h);
      AddFeedForward(specs, b + ".ff2", h, ff);
      AddNorm(specs, b + ".final_norm", h);
    }
    AddLinear(specs, m + ".subband.proj_out", c, h);
  }

  // Transposed convolution, PyTorch layout [in, out, kt, kf].
  specs.push_back({"decoder.weight", {c, z, 3, 3}, c * 9});
  specs.push_back({"decoder.bias", {z}, c * 9});
  AddLinear(specs, "mask.speech", z, z);
  AddLinear(specs, "mask.noise", z, z);
  return specs;
}

const WeightTensor &ModelWeights::Get(const std::string &name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw WeightShapeError("missing weight tensor " + name);
  return it->second;
}

WeightTensor &ModelWeights::Get(const std::string &name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw WeightShapeError("missing weight tensor " + name);
  return it->second;
}

std::size_t ModelWeights::NumParameters() const {
  std::size_t n = 0;
  for (const auto &[name, t] : tensors) n += t.numel();
  return n;
}

void ValidateWeights(const ModelWeights &w, const ModelConfig &cfg) {
  const auto specs = RequiredTensors(cfg);
  for (const auto &s : specs) {
    const auto &t = w.Get(s.name);
    if (t.shape != s.shape)
      throw WeightShapeError("shape mismatch for " + s.name);
    if (t.values.size() != t.numel())
      throw WeightShapeError("value count mismatch for " + s.name);
  }
  if (w.tensors.size() != specs.size())
    throw WeightShapeError("weight container has tensors the config does not use");
}

ModelWeights InitRandom(const ModelConfig &cfg, std::uint64_t seed) {
  ModelWeights w;
  w.fingerprint = cfg.Fingerprint();
  w.seed = seed;
  Rng rng(seed);
  for (const auto &s : RequiredTensors(cfg)) {
    WeightTensor t;
    t.shape = s.shape;
    t.values.resize(t.numel());
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.fan_in));
    for (auto &v : t.values) {
      switch (s.init) {
        case InitKind::kOnes: v = 1.0f; break;
        case InitKind::kZeros: v = 0.0f; break;
        case InitKind::kUniformFanIn:
          v = static_cast<float>(Uniform(rng, -bound, bound));
          break;
      }
    }
    w.tensors.emplace(s.name, std::move(t));
  }
  return w;
}

std::string SerializeWeights(const ModelWeights &w) {
  std::ostringstream head;
  head << kMagic << "\n";
  head << "fingerprint " << w.fingerprint << "\n";
  head << "seed ";
  if (w.seed) head << *w.seed;
  else head << "none";
  head << "\n";
  for (const auto &[name, t] : w.tensors) {
    head << "tensor " << name << " f32 " << t.shape.size();
    for (auto d : t.shape) head << " " << d;
    head << "\n";
  }
  head << "end\n";
  std::string out = head.str();
  for (const auto &[name, t] : w.tensors) {
    const auto *p = reinterpret_cast<const char *>(t.values.data());
    out.append(p, t.values.size() * sizeof(float));
  }
  return out;
}

ModelWeights DeserializeWeights(const std::string &bytes) {
  ModelWeights w;
  std::size_t pos = 0;
  auto next_line = [&]() {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw WeightShapeError("truncated weight manifest");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kMagic) throw WeightShapeError("not a weight container");
  std::vector<std::string> order;
  for (;;) {
    std::istringstream ls(next_line());
    std::string key;
    ls >> key;
    if (key == "end") break;
    if (key == "fingerprint") {
      ls >> w.fingerprint;
    } else if (key == "seed") {
      std::string s;
      ls >> s;
      if (s != "none") w.seed = std::stoull(s);
    } else if (key == "tensor") {
      std::string name, dtype;
      std::size_t ndim = 0;
      ls >> name >> dtype >> ndim;
      if (!ls || dtype != "f32") throw WeightShapeError("bad tensor line for " + name);
      WeightTensor t;
      t.shape.resize(ndim);
      for (auto &d : t.shape) ls >> d;
      if (!ls) throw WeightShapeError("bad tensor shape for " + name);
      order.push_back(name);
      w.tensors.emplace(name, std::move(t));
    } else {
      throw WeightShapeError("unknown manifest entry '" + key + "'");
    }
  }
  for (const auto &name : order) {
    auto &t = w.tensors.at(name);
    const std::size_t n = t.numel();
    if (pos + n * sizeof(float) > bytes.size())
      throw WeightShapeError("weight payload truncated at " + name);
    t.values.resize(n);
    std::memcpy(t.values.data(), bytes.data() + pos, n * sizeof(float));
    pos += n * sizeof(float);
  }
  if (pos != bytes.size()) throw WeightShapeError("trailing bytes after weight payload");
  return w;
}

void SaveWeights(const std::string &path, const ModelWeights &w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  const auto bytes = SerializeWeights(w);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidInput("failed writing " + path);
}

ModelWeights LoadWeights(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return DeserializeWeights(bytes);
}

}  // namespace cabinsep
