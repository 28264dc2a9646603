#ifndef CABINSEP_MODEL_WEIGHTS_H_
#define CABINSEP_MODEL_WEIGHTS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cabinsep/model/config.h"

namespace cabinsep {

struct WeightTensor {
  std::vector<std::size_t> shape;
  std::vector<float> values;  // row-major

  std::size_t numel() const;
  bool operator==(const WeightTensor &) const = default;
};

enum class InitKind { kUniformFanIn, kOnes, kZeros };

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t fan_in = 1;
  InitKind init = InitKind::kUniformFanIn;
};

// Canonical layer paths and shapes required by `cfg`, in initialization and
// file order.
std::vector<TensorSpec> RequiredTensors(const ModelConfig &cfg);

struct ModelWeights {
  std::map<std::string, WeightTensor> tensors;
  std::string fingerprint;
  std::optional<std::uint64_t> seed;

  // Throws WeightShapeError for a missing tensor.
  const WeightTensor &Get(const std::string &name) const;
  WeightTensor &Get(const std::string &name);
  std::size_t NumParameters() const;
  bool operator==(const ModelWeights &) const = default;
};

// Every required tensor present with the exact shape, and nothing else.
// Throws WeightShapeError otherwise.
void ValidateWeights(const ModelWeights &w, const ModelConfig &cfg);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, ones and
// zeros for normalization scales and shifts. Same seed, same bits.
ModelWeights InitRandom(const ModelConfig &cfg, std::uint64_t seed);

// Container layout: a text manifest ("CABINSEP-WEIGHTS 1", fingerprint, seed,
// one "tensor <path> f32 <ndim> <dims...>" line per tensor, "end") followed by
// the tensors' values as contiguous little-endian float32 in manifest order.
std::string SerializeWeights(const ModelWeights &w);
ModelWeights DeserializeWeights(const std::string &bytes);
void SaveWeights(const std::string &path, const ModelWeights &w);
ModelWeights LoadWeights(const std::string &path);

}  // namespace cabinsep

#endif  // CABINSEP_MODEL_WEIGHTS_H_
