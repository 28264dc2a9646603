#include "cabinsep/model/network.h"

#include <algorithm>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

using layers::CausalConv2d;

Tensor3 ConvTensor(const CausalConv2d &conv, const Tensor3 &in, bool relu) {
  if (in.channels() != conv.in)
    throw InvalidInput("conv input has the wrong channel count");
  Tensor3 out(conv.out, in.frames(), in.bins());
  std::vector<const float *> hist(conv.kt);
  for (std::size_t t = 0; t < in.frames(); ++t) {
    for (std::size_t j = 0; j < conv.kt; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) -
                                 static_cast<std::ptrdiff_t>(conv.kt - 1);
      hist[j] = src >= 0 ? in.Frame(static_cast<std::size_t>(src)).data() : nullptr;
    }
    conv.Frame(hist, in.bins(), out.Frame(t).data());
    if (relu) layers::ReluInPlace(out.Frame(t));
  }
  return out;
}

void MaskHeadsFrame(const Network &net, const float *decoded, float *speech,
                    float *noise) {
  const std::size_t bins = net.config().bins;
  const std::size_t n = net.config().zones * bins;
  layers::ChannelLinearFrame(net.mask_speech, bins, decoded, speech);
  layers::ChannelLinearFrame(net.mask_noise, bins, decoded, noise);
  for (std::size_t i = 0; i < n; ++i) {
    speech[i] = layers::Sigmoid(speech[i]);
    noise[i] = layers::Sigmoid(noise[i]);
  }
}

bool TacActive(const ModelConfig &cfg, std::size_t t, std::size_t start) {
  return !cfg.time_skip || t % 2 == start;
}

void CheckStart(std::size_t start) {
  if (start > 1) throw InvalidInput("time-skip start must be 0 or 1");
}

}  // namespace

Network::Network(const ModelConfig &cfg, ModelWeights weights)
    : weights_(std::make_shared<const ModelWeights>(std::move(weights))), cfg_(cfg) {
  cfg_.Validate();
  const ModelWeights &w = *weights_;
  ValidateWeights(w, cfg_);
  const std::size_t z = cfg_.zones, e = cfg_.encoder_channels,
                    c = cfg_.embed_channels;
  spec = {CausalConv2d::Bind(w, "encoder.spec.conv1", e, 2 * z, 3, 3),
          CausalConv2d::Bind(w, "encoder.spec.conv2", e, e, 3, 3)};
  lps = {CausalConv2d::Bind(w, "encoder.lps.conv1", e, z, 3, 3),
         CausalConv2d::Bind(w, "encoder.lps.conv2", e, e, 3, 3)};
  ipd = {CausalConv2d::Bind(w, "encoder.ipd.conv1", e, 2, 3, 3),
         CausalConv2d::Bind(w, "encoder.ipd.conv2", e, e, 3, 3)};
  merge = CausalConv2d::Bind(w, "encoder.merge", c, 3 * e, 1, 1);
  for (std::size_t n = 0; n < cfg_.n_full_sub; ++n) {
    const std::string m = "fullsub." + std::to_string(n);
    modules.push_back(
        {layers::FullBandLstmLayer::Bind(w, m + ".lstm", c, cfg_.bins,
                                         cfg_.lstm_hidden()),
         layers::TacLayer::Bind(w, m + ".tac", c, cfg_.tac_channels()),
         layers::SubbandConformerLayer::Bind(w, m + ".subband", cfg_)});
  }
  decoder = layers::CausalConvTranspose2d::Bind(w, "decoder", c, z, 3, 3);
  mask_speech = layers::Linear::Bind(w, "mask.speech", z, z);
  mask_noise = layers::Linear::Bind(w, "mask.noise", z, z);
}

ModelInputs ComputeModelInputs(const ComplexSpectrogram &y) {
  ModelInputs in;
  in.stacked = StackRealImag(y);
  in.lps = ComputeLps(y);
  if (y.channels() >= 2) {
    in.ipd = ComputeIpd(y, 0, 1);
  } else {
    in.ipd = FeatureTensor(2, y.frames(), y.bins());
    for (std::size_t t = 0; t < y.frames(); ++t)
      for (std::size_t f = 0; f < y.bins(); ++f) in.ipd.at(0, t, f) = 1.0f;
  }
  return in;
}

EmbeddingTensor Encode(const Network &net, const FeatureTensor &stacked,
                       const FeatureTensor &lps, const FeatureTensor &ipd) {
  const auto &cfg = net.config();
  const std::size_t frames = stacked.frames();
  if (stacked.channels() != 2 * cfg.zones || lps.channels() != cfg.zones ||
      ipd.channels() != 2 || stacked.bins() != cfg.bins ||
      lps.frames() != frames || ipd.frames() != frames ||
      lps.bins() != cfg.bins || ipd.bins() != cfg.bins)
    throw InvalidInput("encoder inputs have inconsistent shapes");

  auto a = ConvTensor(net.spec.conv2, ConvTensor(net.spec.conv1, stacked, true), true);
  auto b = ConvTensor(net.lps.conv2, ConvTensor(net.lps.conv1, lps, true), true);
  auto c = ConvTensor(net.ipd.conv2, ConvTensor(net.ipd.conv1, ipd, true), true);
  Tensor3 cat(a.channels() + b.channels() + c.channels(), frames, cfg.bins);
  for (std::size_t t = 0; t < frames; ++t) {
    auto dst = cat.Frame(t).begin();
    dst = std::copy(a.Frame(t).begin(), a.Frame(t).end(), dst);
    dst = std::copy(b.Frame(t).begin(), b.Frame(t).end(), dst);
    std::copy(c.Frame(t).begin(), c.Frame(t).end(), dst);
  }
  return ConvTensor(net.merge, cat, false);
}

EmbeddingTensor Encode(const ComplexSpectrogram &y, const FeatureTensor &lps,
                       const FeatureTensor &ipd, const ModelWeights &w,
                       const ModelConfig &cfg) {
  Network net(cfg, w);
  return Encode(net, StackRealImag(y), lps, ipd);
}

EmbeddingTensor TimeSkipSelect(const EmbeddingTensor &e, std::size_t start) {
  CheckStart(start);
  const std::size_t count = e.frames() > start ? (e.frames() - start + 1) / 2 : 0;
  EmbeddingTensor out(e.channels(), count, e.bins());
  for (std::size_t i = 0; i < count; ++i) {
    auto src = e.Frame(start + 2 * i);
    std::copy(src.begin(), src.end(), out.Frame(i).begin());
  }
  return out;
}

EmbeddingTensor TimeSkipMerge(const EmbeddingTensor &processed,
                              const EmbeddingTensor &original,
                              std::size_t start) {
  CheckStart(start);
  const std::size_t count =
      original.frames() > start ? (original.frames() - start + 1) / 2 : 0;
  if (processed.frames() != count || processed.channels() != original.channels() ||
      processed.bins() != original.bins())
    throw InvalidInput("time-skip merge: processed frames do not match the selection");
  EmbeddingTensor out = original;
  for (std::size_t i = 0; i < count; ++i) {
    auto src = processed.Frame(i);
    std::copy(src.begin(), src.end(), out.Frame(start + 2 * i).begin());
  }
  return out;
}

EmbeddingTensor TacForward(const EmbeddingTensor &e,
                           const layers::TacLayer &tac) {
  if (e.channels() != tac.linear_a.in)
    throw InvalidInput("TAC input has the wrong channel count");
  EmbeddingTensor out(e.channels(), e.frames(), e.bins());
  for (std::size_t t = 0; t < e.frames(); ++t)
    tac.Frame(e.bins(), e.Frame(t).data(), out.Frame(t).data());
  return out;
}

EmbeddingTensor FullBandLstm(const EmbeddingTensor &e,
                             const layers::FullBandLstmLayer &lstm) {
  if (e.FrameSize() != lstm.proj_in.in)
    throw InvalidInput("full-band LSTM input has the wrong shape");
  EmbeddingTensor out(e.channels(), e.frames(), e.bins());
  auto state = lstm.InitialState();
  for (std::size_t t = 0; t < e.frames(); ++t)
    lstm.Frame(state, e.Frame(t), out.Frame(t));
  return out;
}

EmbeddingTensor SubbandConformer(const EmbeddingTensor &e,
                                 const layers::SubbandConformerLayer &layer,
                                 const ModelConfig &cfg) {
  if (e.channels() != layer.proj_in.in || e.bins() != cfg.bins)
    throw InvalidInput("sub-band conformer input has the wrong shape");
  EmbeddingTensor out(e.channels(), e.frames(), e.bins());
  auto states = layer.InitialState(cfg);
  for (std::size_t t = 0; t < e.frames(); ++t)
    layer.Frame(states, e.bins(), e.Frame(t), out.Frame(t));
  return out;
}

EmbeddingTensor TacForward(const EmbeddingTensor &e, const ModelWeights &w,
                           const ModelConfig &cfg, std::size_t module) {
  cfg.Validate();
  return TacForward(e, layers::TacLayer::Bind(
                           w, "fullsub." + std::to_string(module) + ".tac",
                           cfg.embed_channels, cfg.tac_channels()));
}

EmbeddingTensor FullBandLstm(const EmbeddingTensor &e, const ModelWeights &w,
                             const ModelConfig &cfg, std::size_t module) {
  return FullBandLstm(
      e, layers::FullBandLstmLayer::Bind(
             w, "fullsub." + std::to_string(module) + ".lstm",
             cfg.embed_channels, cfg.bins, cfg.lstm_hidden()));
}

EmbeddingTensor SubbandConformer(const EmbeddingTensor &e,
                                 const ModelWeights &w, const ModelConfig &cfg,
                                 std::size_t module) {
  return SubbandConformer(
      e,
      layers::SubbandConformerLayer::Bind(
          w, "fullsub." + std::to_string(module) + ".subband", cfg),
      cfg);
}

MaskPair Forward(const Network &net, const ComplexSpectrogram &y,
                 std::size_t start) {
  CheckStart(start);
  const auto &cfg = net.config();
  if (y.channels() != cfg.zones || y.bins() != cfg.bins)
    throw WeightShapeError("spectrogram shape does not match the model config");
  const auto inputs = ComputeModelInputs(y);
  auto e = Encode(net, inputs.stacked, inputs.lps, inputs.ipd);
  for (const auto &m : net.modules) {
    e = FullBandLstm(e, m.lstm);
    if (cfg.time_skip)
      e = TimeSkipMerge(TacForward(TimeSkipSelect(e, start), m.tac), e, start);
    else
      e = TacForward(e, m.tac);
    e = SubbandConformer(e, m.subband, cfg);
  }

  const std::size_t frames = y.frames();
  MaskPair masks{Tensor3(cfg.zones, frames, cfg.bins),
                 Tensor3(cfg.zones, frames, cfg.bins)};
  std::vector<float> decoded(cfg.zones * cfg.bins);
  std::vector<const float *> hist(net.decoder.kt);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < hist.size(); ++j)
      hist[j] = t >= j ? e.Frame(t - j).data() : nullptr;
    net.decoder.Frame(hist, cfg.bins, decoded.data());
    MaskHeadsFrame(net, decoded.data(), masks.speech.Frame(t).data(),
                   masks.noise.Frame(t).data());
  }
  return masks;
}

MaskPair Forward(const ComplexSpectrogram &y, const ModelWeights &w,
                 const ModelConfig &cfg, std::size_t start) {
  Network net(cfg, w);
  return Forward(net, y, start);
}

void ModelStream::History::Push(std::span<const float> frame) {
  frames_.emplace_back(frame.begin(), frame.end());
  if (frames_.size() > depth_) frames_.pop_front();
}

std::vector<const float *> ModelStream::History::Oldest() const {
  std::vector<const float *> out(depth_, nullptr);
  const std::size_t missing = depth_ - frames_.size();
  for (std::size_t i = 0; i < frames_.size(); ++i)
    out[missing + i] = frames_[i].data();
  return out;
}

std::vector<const float *> ModelStream::History::Newest() const {
  std::vector<const float *> out(depth_, nullptr);
  for (std::size_t i = 0; i < frames_.size(); ++i)
    out[i] = frames_[frames_.size() - 1 - i].data();
  return out;
}

ModelStream::ModelStream(const Network &net, std::size_t start)
    : net_(net), start_(start),
      spec1_(3, 2 * net.config().zones * net.config().bins),
      spec2_(3, net.config().encoder_channels * net.config().bins),
      lps1_(3, net.config().zones * net.config().bins),
      lps2_(3, net.config().encoder_channels * net.config().bins),
      ipd1_(3, 2 * net.config().bins),
      ipd2_(3, net.config().encoder_channels * net.config().bins),
      decoder_(3, net.config().embed_channels * net.config().bins) {
  CheckStart(start);
  for (const auto &m : net.modules) {
    lstm_.push_back(m.lstm.InitialState());
    conformer_.push_back(m.subband.InitialState(net.config()));
  }
}

ModelStream::FrameMasks ModelStream::Push(std::span<const Complex> snapshot) {
  const auto &cfg = net_.config();
  const std::size_t z = cfg.zones, f = cfg.bins, e = cfg.encoder_channels,
                    c = cfg.embed_channels;
  if (snapshot.size() != z * f)
    throw WeightShapeError("snapshot shape does not match the model config");

  std::vector<float> stacked(2 * z * f), lps(z * f), ipd(2 * f, 0.0f);
  StackRealImagFrame(snapshot, z, f, stacked);
  LpsFrame(snapshot, kDefaultLpsFloor, lps);
  if (z >= 2) {
    IpdFrame(snapshot.subspan(0, f), snapshot.subspan(f, f), ipd);
  } else {
    std::fill(ipd.begin(), ipd.begin() + f, 1.0f);
  }

  auto encode = [&](const Network::Encoder &enc, History &h1, History &h2,
                    std::span<const float> input, float *dst) {
    std::vector<float> mid(e * f);
    h1.Push(input);
    enc.conv1.Frame(h1.Oldest(), f, mid.data());
    layers::ReluInPlace(mid);
    h2.Push(mid);
    enc.conv2.Frame(h2.Oldest(), f, dst);
    layers::ReluInPlace({dst, e * f});
  };
  std::vector<float> cat(3 * e * f);
  encode(net_.spec, spec1_, spec2_, stacked, cat.data());
  encode(net_.lps, lps1_, lps2_, lps, cat.data() + e * f);
  encode(net_.ipd, ipd1_, ipd2_, ipd, cat.data() + 2 * e * f);

  std::vector<float> x(c * f), y(c * f);
  const float *merge_hist[] = {cat.data()};
  net_.merge.Frame(merge_hist, f, x.data());

  for (std::size_t m = 0; m < net_.modules.size(); ++m) {
    const auto &mod = net_.modules[m];
    mod.lstm.Frame(lstm_[m], x, y);
    if (TacActive(cfg, frame_, start_)) {
      mod.tac.Frame(f, y.data(), x.data());
      std::swap(x, y);
    }
    mod.subband.Frame(conformer_[m], f, y, x);
  }

  decoder_.Push(x);
  std::vector<float> decoded(z * f);
  net_.decoder.Frame(decoder_.Newest(), f, decoded.data());
  FrameMasks out{std::vector<float>(z * f), std::vector<float>(z * f)};
  MaskHeadsFrame(net_, decoded.data(), out.speech.data(), out.noise.data());
  ++frame_;
  return out;
}

}  // namespace cabinsep
