#include "cabinsep/model/layers.h"

#include <algorithm>
#include <cmath>

#include "cabinsep/common.h"

namespace cabinsep::layers {

namespace {

const float *Data(const ModelWeights &w, const std::string &name,
                  const std::vector<std::size_t> &shape) {
  const auto &t = w.Get(name);
  if (t.shape != shape) throw WeightShapeError("shape mismatch for " + name);
  return t.values.data();
}

// Eight independent partial sums combined in a fixed order: vectorizes
// without -ffast-math and stays deterministic.
float Dot(const float *a, const float *b, std::size_t n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

std::vector<float> &Scratch(std::size_t slot, std::size_t n) {
  thread_local std::vector<std::vector<float>> buffers(8);
  auto &b = buffers[slot];
  if (b.size() < n) b.resize(n);
  return b;
}

}  // namespace

Linear Linear::Bind(const ModelWeights &w, const std::string &prefix,
                    std::size_t out, std::size_t in) {
  Linear l;
  l.weight = Data(w, prefix + ".weight", {out, in});
  l.bias = Data(w, prefix + ".bias", {out});
  l.out = out;
  l.in = in;
  return l;
}

void Linear::Apply(const float *x, float *y) const {
  for (std::size_t o = 0; o < out; ++o)
    y[o] = bias[o] + Dot(weight + o * in, x, in);
}

CausalConv2d CausalConv2d::Bind(const ModelWeights &w, const std::string &prefix,
                                std::size_t out, std::size_t in, std::size_t kt,
                                std::size_t kf) {
  CausalConv2d c;
  c.weight = Data(w, prefix + ".weight", {out, in, kt, kf});
  c.bias = Data(w, prefix + ".bias", {out});
  c.out = out;
  c.in = in;
  c.kt = kt;
  c.kf = kf;
  return c;
}

void CausalConv2d::Frame(std::span<const float *const> history,
                         std::size_t bins, float *output) const {
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kf / 2);
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(bins);
  for (std::size_t o = 0; o < out; ++o) {
    float *dst = output + o * bins;
    std::fill(dst, dst + bins, bias[o]);
    for (std::size_t i = 0; i < in; ++i) {
      for (std::size_t a = 0; a < kt; ++a) {
        const float *src = history[a];
        if (src == nullptr) continue;
        src += i * bins;
        for (std::size_t b = 0; b < kf; ++b) {
          const float wv = weight[((o * in + i) * kt + a) * kf + b];
          const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(b) - half;
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
          const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(nb, nb - off);
          for (std::ptrdiff_t f = lo; f < hi; ++f) dst[f] += wv * src[f + off];
        }
      }
    }
  }
}

CausalConvTranspose2d CausalConvTranspose2d::Bind(const ModelWeights &w,
                                                  const std::string &prefix,
                                                  std::size_t in,
                                                  std::size_t out,
                                                  std::size_t kt,
                                                  std::size_t kf) {
  CausalConvTranspose2d c;
  c.weight = Data(w, prefix + ".weight", {in, out, kt, kf});
  c.bias = Data(w, prefix + ".bias", {out});
  c.in = in;
  c.out = out;
  c.kt = kt;
  c.kf = kf;
  return c;
}

void CausalConvTranspose2d::Frame(std::span<const float *const> history,
                                  std::size_t bins, float *output) const {
  // out[o][t][f] = b[o] + sum_{i,a,b} in[i][t - a][f + pad - b] W[i][o][a][b]
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kf / 2);
  const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(bins);
  for (std::size_t o = 0; o < out; ++o) {
    float *dst = output + o * bins;
    std::fill(dst, dst + bins, bias[o]);
    for (std::size_t i = 0; i < in; ++i) {
      for (std::size_t a = 0; a < kt; ++a) {
        const float *src = history[a];
        if (src == nullptr) continue;
        src += i * bins;
        for (std::size_t b = 0; b < kf; ++b) {
          const float wv = weight[((i * out + o) * kt + a) * kf + b];
          const std::ptrdiff_t off = pad - static_cast<std::ptrdiff_t>(b);
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
          const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(nb, nb - off);
          for (std::ptrdiff_t f = lo; f < hi; ++f) dst[f] += wv * src[f + off];
        }
      }
    }
  }
}

void ChannelLinearFrame(const Linear &lin, std::size_t bins, const float *in,
                        float *out) {
  for (std::size_t o = 0; o < lin.out; ++o) {
    float *dst = out + o * bins;
    std::fill(dst, dst + bins, lin.bias[o]);
    for (std::size_t i = 0; i < lin.in; ++i) {
      const float wv = lin.weight[o * lin.in + i];
      const float *src = in + i * bins;
      for (std::size_t f = 0; f < bins; ++f) dst[f] += wv * src[f];
    }
  }
}

LayerNorm LayerNorm::Bind(const ModelWeights &w, const std::string &prefix,
                          std::size_t dim) {
  LayerNorm n;
  n.gamma = Data(w, prefix + ".gamma", {dim});
  n.beta = Data(w, prefix + ".beta", {dim});
  n.dim = dim;
  return n;
}

void LayerNorm::Apply(const float *x, float *y) const {
  float mean = 0.0f;
  for (std::size_t i = 0; i < dim; ++i) mean += x[i];
  mean /= static_cast<float>(dim);
  float var = 0.0f;
  for (std::size_t i = 0; i < dim; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= static_cast<float>(dim);
  const float inv = 1.0f / std::sqrt(var + 1e-5f);
  for (std::size_t i = 0; i < dim; ++i)
    y[i] = (x[i] - mean) * inv * gamma[i] + beta[i];
}

void ReluInPlace(std::span<float> x) {
  for (auto &v : x) v = v > 0.0f ? v : 0.0f;
}

float Sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

float Swish(float x) { return x * Sigmoid(x); }

FullBandLstmLayer FullBandLstmLayer::Bind(const ModelWeights &w,
                                          const std::string &prefix,
                                          std::size_t channels,
                                          std::size_t bins,
                                          std::size_t hidden) {
  FullBandLstmLayer l;
  l.proj_in = Linear::Bind(w, prefix + ".proj_in", hidden, channels * bins);
  l.weight_ih = Data(w, prefix + ".weight_ih", {4 * hidden, hidden});
  l.weight_hh = Data(w, prefix + ".weight_hh", {4 * hidden, hidden});
  l.bias_ih = Data(w, prefix + ".bias_ih", {4 * hidden});
  l.bias_hh = Data(w, prefix + ".bias_hh", {4 * hidden});
  l.proj_out = Linear::Bind(w, prefix + ".proj_out", channels * bins, hidden);
  l.hidden = hidden;
  return l;
}

LstmState FullBandLstmLayer::InitialState() const {
  return {std::vector<float>(hidden, 0.0f), std::vector<float>(hidden, 0.0f)};
}

void FullBandLstmLayer::Frame(LstmState &state, std::span<const float> in,
                              std::span<float> out) const {
  auto &p = Scratch(0, hidden);
  auto &gates = Scratch(1, 4 * hidden);
  proj_in.Apply(in.data(), p.data());
  for (std::size_t g = 0; g < 4 * hidden; ++g) {
    gates[g] = Dot(weight_ih + g * hidden, p.data(), hidden) + bias_ih[g] +
               Dot(weight_hh + g * hidden, state.h.data(), hidden) + bias_hh[g];
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    const float ig = Sigmoid(gates[j]);
    const float fg = Sigmoid(gates[hidden + j]);
    const float gg = std::tanh(gates[2 * hidden + j]);
    const float og = Sigmoid(gates[3 * hidden + j]);
    state.c[j] = fg * state.c[j] + ig * gg;
    state.h[j] = og * std::tanh(state.c[j]);
  }
  proj_out.Apply(state.h.data(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
}

TacLayer TacLayer::Bind(const ModelWeights &w, const std::string &prefix,
                        std::size_t channels, std::size_t compressed) {
  TacLayer t;
  t.linear_a = Linear::Bind(w, prefix + ".linear_a", compressed, channels);
  t.linear_b = Linear::Bind(w, prefix + ".linear_b", compressed, channels);
  t.linear_c = Linear::Bind(w, prefix + ".linear_c", channels, 2 * compressed);
  return t;
}

void TacLayer::Frame(std::size_t bins, const float *in, float *out) const {
  const std::size_t cd = linear_a.out;
  auto &cat = Scratch(2, 2 * cd * bins);
  auto &branch_b = Scratch(3, cd * bins);
  ChannelLinearFrame(linear_a, bins, in, cat.data());
  ReluInPlace({cat.data(), cd * bins});
  ChannelLinearFrame(linear_b, bins, in, branch_b.data());
  ReluInPlace({branch_b.data(), cd * bins});
  float *mean = cat.data() + cd * bins;
  for (std::size_t f = 0; f < bins; ++f) {
    float acc = 0.0f;
    for (std::size_t c = 0; c < cd; ++c) acc += branch_b[c * bins + f];
    mean[f] = acc / static_cast<float>(cd);
  }
  for (std::size_t c = 1; c < cd; ++c)
    std::copy(mean, mean + bins, mean + c * bins);
  ChannelLinearFrame(linear_c, bins, cat.data(), out);
}

float TacLayer::AveragedBranch(const float *x) const {
  std::vector<float> b(linear_b.out);
  linear_b.Apply(x, b.data());
  float acc = 0.0f;
  for (float v : b) acc += v > 0.0f ? v : 0.0f;
  return acc / static_cast<float>(b.size());
}

ConformerBlock ConformerBlock::Bind(const ModelWeights &w,
                                    const std::string &p, std::size_t dim,
                                    std::size_t ff, std::size_t heads,
                                    std::size_t kernel) {
  ConformerBlock b;
  b.ff1_norm = LayerNorm::Bind(w, p + ".ff1.norm", dim);
  b.ff1_linear1 = Linear::Bind(w, p + ".ff1.linear1", ff, dim);
  b.ff1_linear2 = Linear::Bind(w, p + ".ff1.linear2", dim, ff);
  b.attn_norm = LayerNorm::Bind(w, p + ".attn.norm", dim);
  b.q = Linear::Bind(w, p + ".attn.q", dim, dim);
  b.k = Linear::Bind(w, p + ".attn.k", dim, dim);
  b.v = Linear::Bind(w, p + ".attn.v", dim, dim);
  b.attn_out = Linear::Bind(w, p + ".attn.out", dim, dim);
  b.conv_norm = LayerNorm::Bind(w, p + ".conv.norm", dim);
  b.pw1 = Linear::Bind(w, p + ".conv.pw1", 2 * dim, dim);
  b.dw_weight = Data(w, p + ".conv.dw.weight", {dim, kernel});
  b.dw_bias = Data(w, p + ".conv.dw.bias", {dim});
  b.bn_scale = Data(w, p + ".conv.bn.scale", {dim});
  b.bn_shift = Data(w, p + ".conv.bn.shift", {dim});
  b.pw2 = Linear::Bind(w, p + ".conv.pw2", dim, dim);
  b.ff2_norm = LayerNorm::Bind(w, p + ".ff2.norm", dim);
  b.ff2_linear1 = Linear::Bind(w, p + ".ff2.linear1", ff, dim);
  b.ff2_linear2 = Linear::Bind(w, p + ".ff2.linear2", dim, ff);
  b.final_norm = LayerNorm::Bind(w, p + ".final_norm", dim);
  b.dim = dim;
  b.heads = heads;
  b.kernel = kernel;
  return b;
}

ConformerState::ConformerState(std::size_t dim, std::size_t kernel,
                               std::optional<std::size_t> lookback)
    : dim_(dim), lookback_(lookback),
      conv_history_((kernel - 1) * dim, 0.0f) {}

void ConformerState::Append(const float *k, const float *v) {
  keys_.insert(keys_.end(), k, k + dim_);
  values_.insert(values_.end(), v, v + dim_);
  if (!lookback_) return;
  while (cached_frames() > *lookback_ + 1) ++start_;
  if (start_ >= 64 && start_ * 2 >= keys_.size() / dim_) {
    keys_.erase(keys_.begin(), keys_.begin() + start_ * dim_);
    values_.erase(values_.begin(), values_.begin() + start_ * dim_);
    start_ = 0;
  }
}

namespace {

void FeedForwardHalfStep(const LayerNorm &norm, const Linear &l1,
                         const Linear &l2, float *x, float *n, float *hid,
                         float *y) {
  norm.Apply(x, n);
  l1.Apply(n, hid);
  for (std::size_t i = 0; i < l1.out; ++i) hid[i] = Swish(hid[i]);
  l2.Apply(hid, y);
  for (std::size_t i = 0; i < l2.out; ++i) x[i] += 0.5f * y[i];
}

}  // namespace

void ConformerStep(const ConformerBlock &b, ConformerState &s, float *x) {
  const std::size_t d = b.dim;
  auto &buf = Scratch(4, 8 * d + b.ff1_linear1.out + b.ff2_linear1.out);
  float *n = buf.data();
  float *y = n + d;
  float *q = y + d;
  float *k = q + d;
  float *v = k + d;
  float *ctx = v + d;
  float *glu = ctx + d;  // 2d
  float *hid = glu + 2 * d;

  FeedForwardHalfStep(b.ff1_norm, b.ff1_linear1, b.ff1_linear2, x, n, hid, y);

  // Masked self-attention: the cache only ever holds frames <= t.
  b.attn_norm.Apply(x, n);
  b.q.Apply(n, q);
  b.k.Apply(n, k);
  b.v.Apply(n, v);
  s.Append(k, v);
  const std::size_t frames = s.cached_frames();
  const float *keys = s.keys_.data() + s.start_ * d;
  const float *values = s.values_.data() + s.start_ * d;
  const std::size_t hd = d / b.heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
  auto &scores = Scratch(5, frames);
  for (std::size_t h = 0; h < b.heads; ++h) {
    const std::size_t off = h * hd;
    float peak = -INFINITY;
    for (std::size_t j = 0; j < frames; ++j) {
      float acc = 0.0f;
      for (std::size_t e = 0; e < hd; ++e) acc += q[off + e] * keys[j * d + off + e];
      scores[j] = acc * scale;
      peak = std::max(peak, scores[j]);
    }
    float total = 0.0f;
    for (std::size_t j = 0; j < frames; ++j) {
      scores[j] = std::exp(scores[j] - peak);
      total += scores[j];
    }
    for (std::size_t e = 0; e < hd; ++e) ctx[off + e] = 0.0f;
    for (std::size_t j = 0; j < frames; ++j) {
      const float p = scores[j] / total;
      for (std::size_t e = 0; e < hd; ++e) ctx[off + e] += p * values[j * d + off + e];
    }
  }
  b.attn_out.Apply(ctx, y);
  for (std::size_t i = 0; i < d; ++i) x[i] += y[i];

  // Convolution module: pointwise + GLU, causal depthwise, folded batch norm,
  // swish, pointwise.
  b.conv_norm.Apply(x, n);
  b.pw1.Apply(n, glu);
  const std::size_t past = b.kernel - 1;
  for (std::size_t c = 0; c < d; ++c) {
    const float u = glu[c] * Sigmoid(glu[d + c]);
    float acc = b.dw_bias[c];
    for (std::size_t j = 0; j < past; ++j)
      acc += b.dw_weight[c * b.kernel + j] * s.conv_history_[j * d + c];
    acc += b.dw_weight[c * b.kernel + past] * u;
    for (std::size_t j = 0; j + 1 < past; ++j)
      s.conv_history_[j * d + c] = s.conv_history_[(j + 1) * d + c];
    if (past > 0) s.conv_history_[(past - 1) * d + c] = u;
    n[c] = Swish(acc * b.bn_scale[c] + b.bn_shift[c]);
  }
  b.pw2.Apply(n, y);
  for (std::size_t i = 0; i < d; ++i) x[i] += y[i];

  FeedForwardHalfStep(b.ff2_norm, b.ff2_linear1, b.ff2_linear2, x, n, hid, y);

  b.final_norm.Apply(x, n);
  std::copy(n, n + d, x);
}

SubbandConformerLayer SubbandConformerLayer::Bind(const ModelWeights &w,
                                                  const std::string &prefix,
                                                  const ModelConfig &cfg) {
  SubbandConformerLayer l;
  const std::size_t c = cfg.embed_channels, h = cfg.subband_hidden;
  l.proj_in = Linear::Bind(w, prefix + ".proj_in", h, c);
  for (std::size_t i = 0; i < cfg.conformer_layers; ++i)
    l.blocks.push_back(ConformerBlock::Bind(
        w, prefix + ".block." + std::to_string(i), h, cfg.ff_dim,
        cfg.attn_heads, cfg.conv_kernel));
  l.proj_out = Linear::Bind(w, prefix + ".proj_out", c, h);
  return l;
}

std::vector<ConformerState> SubbandConformerLayer::InitialState(
    const ModelConfig &cfg) const {
  return std::vector<ConformerState>(
      cfg.bins * blocks.size(),
      ConformerState(cfg.subband_hidden, cfg.conv_kernel, cfg.lookback_frames()));
}

void SubbandConformerLayer::Frame(std::vector<ConformerState> &states,
                                  std::size_t bins, std::span<const float> in,
                                  std::span<float> out) const {
  const std::size_t c = proj_in.in, h = proj_in.out;
  auto &buf = Scratch(6, 2 * c + h);
  float *e = buf.data();
  float *x = e + c;
  float *y = x + h;
  for (std::size_t f = 0; f < bins; ++f) {
    for (std::size_t ch = 0; ch < c; ++ch) e[ch] = in[ch * bins + f];
    proj_in.Apply(e, x);
    for (std::size_t l = 0; l < blocks.size(); ++l)
      ConformerStep(blocks[l], states[f * blocks.size() + l], x);
    proj_out.Apply(x, y);
    for (std::size_t ch = 0; ch < c; ++ch) out[ch * bins + f] = e[ch] + y[ch];
  }
}

}  // namespace cabinsep::layers
