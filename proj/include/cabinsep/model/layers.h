#ifndef CABINSEP_MODEL_LAYERS_H_
#define CABINSEP_MODEL_LAYERS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cabinsep/model/weights.h"

// Frame-level kernels. Every layer is written as "produce output frame t from
// input frames <= t", and both the whole-utterance path and the streaming path
// call these same functions in the same accumulation order, which is what
// makes the two bit-identical.
namespace cabinsep::layers {

struct Linear {
  const float *weight = nullptr;  // [out][in]
  const float *bias = nullptr;
  std::size_t out = 0, in = 0;

  static Linear Bind(const ModelWeights &w, const std::string &prefix,
                     std::size_t out, std::size_t in);
  // y = W x + b for a single vector.
  void Apply(const float *x, float *y) const;
};

// 2-D convolution over (time, frequency), stride 1, frequency padded
// symmetrically, time padded on the past side only.
struct CausalConv2d {
  const float *weight = nullptr;  // [out][in][kt][kf]
  const float *bias = nullptr;
  std::size_t out = 0, in = 0, kt = 0, kf = 0;

  static CausalConv2d Bind(const ModelWeights &w, const std::string &prefix,
                           std::size_t out, std::size_t in, std::size_t kt,
                           std::size_t kf);
  // history[j] is input frame t - (kt - 1) + j, nullptr where t - ... < 0.
  // Frames are channel-major [in][bins]; output is [out][bins].
  void Frame(std::span<const float *const> history, std::size_t bins,
             float *output) const;
};

// Transposed 2-D convolution, stride 1, truncated to the first T output frames
// so it only looks at the present and the past.
struct CausalConvTranspose2d {
  const float *weight = nullptr;  // [in][out][kt][kf]
  const float *bias = nullptr;
  std::size_t out = 0, in = 0, kt = 0, kf = 0;

  static CausalConvTranspose2d Bind(const ModelWeights &w,
                                    const std::string &prefix, std::size_t in,
                                    std::size_t out, std::size_t kt,
                                    std::size_t kf);
  // history[j] is input frame t - j (j = 0 is the current frame).
  void Frame(std::span<const float *const> history, std::size_t bins,
             float *output) const;
};

// Linear layer over the channel axis applied independently at every bin of a
// channel-major frame.
void ChannelLinearFrame(const Linear &lin, std::size_t bins, const float *in,
                        float *out);

struct LayerNorm {
  const float *gamma = nullptr;
  const float *beta = nullptr;
  std::size_t dim = 0;

  static LayerNorm Bind(const ModelWeights &w, const std::string &prefix,
                        std::size_t dim);
  void Apply(const float *x, float *y) const;
};

void ReluInPlace(std::span<float> x);
float Sigmoid(float x);
float Swish(float x);

struct LstmState {
  std::vector<float> h, c;
};

struct FullBandLstmLayer {
  Linear proj_in;   // C*F -> hidden
  const float *weight_ih = nullptr, *weight_hh = nullptr;
  const float *bias_ih = nullptr, *bias_hh = nullptr;
  Linear proj_out;  // hidden -> C*F
  std::size_t hidden = 0;

  static FullBandLstmLayer Bind(const ModelWeights &w, const std::string &prefix,
                                std::size_t channels, std::size_t bins,
                                std::size_t hidden);
  LstmState InitialState() const;
  // out = in + proj_out(lstm(proj_in(in))). in and out may not alias.
  void Frame(LstmState &state, std::span<const float> in,
             std::span<float> out) const;
};

struct TacLayer {
  Linear linear_a, linear_b, linear_c;

  static TacLayer Bind(const ModelWeights &w, const std::string &prefix,
                       std::size_t channels, std::size_t compressed);
  // One channel-major frame of C x F in, C x F out.
  void Frame(std::size_t bins, const float *in, float *out) const;
  // Averaged branch for one bin: mean over channels of ReLU(linear_b(x)).
  float AveragedBranch(const float *x) const;
};

struct ConformerBlock {
  LayerNorm ff1_norm;
  Linear ff1_linear1, ff1_linear2;
  LayerNorm attn_norm;
  Linear q, k, v, attn_out;
  LayerNorm conv_norm;
  Linear pw1;
  const float *dw_weight = nullptr, *dw_bias = nullptr;
  const float *bn_scale = nullptr, *bn_shift = nullptr;
  Linear pw2;
  LayerNorm ff2_norm;
  Linear ff2_linear1, ff2_linear2;
  LayerNorm final_norm;
  std::size_t dim = 0, heads = 0, kernel = 0;

  static ConformerBlock Bind(const ModelWeights &w, const std::string &prefix,
                             std::size_t dim, std::size_t ff, std::size_t heads,
                             std::size_t kernel);
};

// Per-bin, per-block recurrent state: cached keys/values of past frames and
// the last kernel-1 inputs of the depthwise convolution.
class ConformerState {
 public:
  ConformerState() = default;
  ConformerState(std::size_t dim, std::size_t kernel,
                 std::optional<std::size_t> lookback);

  std::size_t cached_frames() const { return (keys_.size() / dim_) - start_; }

 private:
  friend void ConformerStep(const ConformerBlock &, ConformerState &, float *);
  void Append(const float *k, const float *v);

  std::size_t dim_ = 0;
  std::optional<std::size_t> lookback_;
  std::vector<float> keys_, values_;
  std::size_t start_ = 0;     // first live frame in keys_/values_
  std::vector<float> conv_history_;  // (kernel - 1) x dim, oldest first
};

// Runs one block on the current frame's vector x (length dim), in place.
void ConformerStep(const ConformerBlock &block, ConformerState &state,
                   float *x);

struct SubbandConformerLayer {
  Linear proj_in;   // C -> H
  std::vector<ConformerBlock> blocks;
  Linear proj_out;  // H -> C

  static SubbandConformerLayer Bind(const ModelWeights &w,
                                    const std::string &prefix,
                                    const ModelConfig &cfg);
  std::vector<ConformerState> InitialState(const ModelConfig &cfg) const;
  // states holds blocks.size() entries per bin, bin-major.
  void Frame(std::vector<ConformerState> &states, std::size_t bins,
             std::span<const float> in, std::span<float> out) const;
};

}  // namespace cabinsep::layers

#endif  // CABINSEP_MODEL_LAYERS_H_
