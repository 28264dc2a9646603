#ifndef CABINSEP_TENSOR_H_
#define CABINSEP_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace cabinsep {

// Real C x T x F tensor indexed [c][t][f]. Storage is frame-major so that one
// time frame (all channels and bins) is a contiguous C*F block, which is what
// the frame-recursive layers consume.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t channels, std::size_t frames, std::size_t bins,
          float fill = 0.0f)
      : channels_(channels), frames_(frames), bins_(bins),
        data_(channels * frames * bins, fill) {}

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t FrameSize() const { return channels_ * bins_; }

  float &at(std::size_t c, std::size_t t, std::size_t f) {
    return data_[(t * channels_ + c) * bins_ + f];
  }
  float at(std::size_t c, std::size_t t, std::size_t f) const {
    return data_[(t * channels_ + c) * bins_ + f];
  }

  std::span<float> Frame(std::size_t t) {
    return {data_.data() + t * FrameSize(), FrameSize()};
  }
  std::span<const float> Frame(std::size_t t) const {
    return {data_.data() + t * FrameSize(), FrameSize()};
  }

  std::vector<float> &data() { return data_; }
  const std::vector<float> &data() const { return data_; }

  bool SameShape(const Tensor3 &o) const {
    return channels_ == o.channels_ && frames_ == o.frames_ && bins_ == o.bins_;
  }

  bool operator==(const Tensor3 &o) const {
    return SameShape(o) && data_ == o.data_;
  }

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::vector<float> data_;
};

// Speech and noise masks, Z x T x F each, values in [0, 1].
struct MaskPair {
  Tensor3 speech;
  Tensor3 noise;
};

}  // namespace cabinsep

#endif  // CABINSEP_TENSOR_H_
