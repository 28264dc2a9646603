#ifndef CABINSEP_MODEL_NETWORK_H_
#define CABINSEP_MODEL_NETWORK_H_

#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "cabinsep/dsp/waveform.h"
#include "cabinsep/features/features.h"
#include "cabinsep/model/config.h"
#include "cabinsep/model/layers.h"
#include "cabinsep/model/weights.h"
#include "cabinsep/tensor.h"

namespace cabinsep {

using EmbeddingTensor = Tensor3;

// Weights bound to layer views for one config. Construction validates the
// container and throws WeightShapeError on any mismatch. Holds pointers into
// `weights`, which must outlive it.
class Network {
 public:
  // Keeps its own shared copy of `weights`; the layers point into it, so
  // copies of a Network stay valid.
  Network(const ModelConfig &cfg, ModelWeights weights);

  struct Encoder {
    layers::CausalConv2d conv1, conv2;
  };
  struct FullSub {
    layers::FullBandLstmLayer lstm;
    layers::TacLayer tac;
    layers::SubbandConformerLayer subband;
  };

  const ModelConfig &config() const { return cfg_; }
  const ModelWeights &weights() const { return *weights_; }

  Encoder spec, lps, ipd;
  layers::CausalConv2d merge;
  std::vector<FullSub> modules;
  layers::CausalConvTranspose2d decoder;
  layers::Linear mask_speech, mask_noise;

 private:
  std::shared_ptr<const ModelWeights> weights_;
  ModelConfig cfg_;
};

// The three encoder inputs: stacked real/imaginary (2Z), LPS (Z) and the
// front-row IPD (2). A single-zone model has no microphone pair; its IPD
// input is the constant [1, 0].
struct ModelInputs {
  FeatureTensor stacked, lps, ipd;
};
ModelInputs ComputeModelInputs(const ComplexSpectrogram &y);

// Three two-layer causal conv encoders with ReLU, concatenated and merged
// by a 1x1 conv into C channels.
EmbeddingTensor Encode(const Network &net, const FeatureTensor &stacked,
                       const FeatureTensor &lps, const FeatureTensor &ipd);
EmbeddingTensor Encode(const ComplexSpectrogram &y, const FeatureTensor &lps,
                       const FeatureTensor &ipd, const ModelWeights &w,
                       const ModelConfig &cfg);

// Frames start, start + 2, ... ; start must be 0 or 1.
EmbeddingTensor TimeSkipSelect(const EmbeddingTensor &e, std::size_t start);
// Writes `processed` back at the selected indices of a copy of `original`.
// Throws InvalidInput if the frame count does not match the selection.
EmbeddingTensor TimeSkipMerge(const EmbeddingTensor &processed,
                              const EmbeddingTensor &original,
                              std::size_t start);

EmbeddingTensor TacForward(const EmbeddingTensor &e,
                           const layers::TacLayer &tac);
EmbeddingTensor FullBandLstm(const EmbeddingTensor &e,
                             const layers::FullBandLstmLayer &lstm);
EmbeddingTensor SubbandConformer(const EmbeddingTensor &e,
                                 const layers::SubbandConformerLayer &layer,
                                 const ModelConfig &cfg);

// Convenience overloads that bind full-sub module `module` of `w`.
EmbeddingTensor TacForward(const EmbeddingTensor &e, const ModelWeights &w,
                           const ModelConfig &cfg, std::size_t module = 0);
EmbeddingTensor FullBandLstm(const EmbeddingTensor &e, const ModelWeights &w,
                             const ModelConfig &cfg, std::size_t module = 0);
EmbeddingTensor SubbandConformer(const EmbeddingTensor &e,
                                 const ModelWeights &w, const ModelConfig &cfg,
                                 std::size_t module = 0);

// features -> encode -> N x (LSTM -> skip/TAC/merge -> sub-band conformer)
// -> transposed conv to Z channels -> sigmoid mask heads.
MaskPair Forward(const Network &net, const ComplexSpectrogram &y,
                 std::size_t start = 0);
MaskPair Forward(const ComplexSpectrogram &y, const ModelWeights &w,
                 const ModelConfig &cfg, std::size_t start = 0);

// Frame-by-frame inference with private recurrent state. Feeding the frames
// of a spectrogram one at a time yields exactly Forward()'s masks.
class ModelStream {
 public:
  explicit ModelStream(const Network &net, std::size_t start = 0);

  struct FrameMasks {
    std::vector<float> speech;  // Z x F, zone-major
    std::vector<float> noise;
  };

  // `snapshot` is one time frame, Z x F, zone-major.
  FrameMasks Push(std::span<const Complex> snapshot);
  std::size_t frames_processed() const { return frame_; }

 private:
  // Last `depth` frames, oldest first.
  class History {
   public:
    History(std::size_t depth, std::size_t frame_size)
        : depth_(depth), frame_size_(frame_size) {}
    void Push(std::span<const float> frame);
    // Conv order: history[j] = frame t - (depth - 1) + j.
    std::vector<const float *> Oldest() const;
    // Transposed-conv order: history[j] = frame t - j.
    std::vector<const float *> Newest() const;

   private:
    std::size_t depth_, frame_size_;
    std::deque<std::vector<float>> frames_;
  };

  const Network &net_;
  std::size_t start_;
  std::size_t frame_ = 0;
  History spec1_, spec2_, lps1_, lps2_, ipd1_, ipd2_, decoder_;
  std::vector<layers::LstmState> lstm_;
  std::vector<std::vector<layers::ConformerState>> conformer_;
};

}  // namespace cabinsep

#endif  // CABINSEP_MODEL_NETWORK_H_
