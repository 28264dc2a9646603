#ifndef CABINSEP_MODEL_MACS_H_
#define CABINSEP_MODEL_MACS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cabinsep/model/config.h"

namespace cabinsep {

struct MacItem {
  std::string layer;
  std::uint64_t macs = 0;  // for the whole input, not per second
};

// Analytic multiply-accumulate count of one forward pass over `seconds` of
// audio. Only multiplies inside linear, convolution and attention products
// are counted; activations and normalisation are free.
struct MacReport {
  double seconds = 0.0;
  std::size_t frames = 0;
  std::vector<MacItem> items;

  std::uint64_t total() const;
  double per_second() const { return total() / seconds; }
  double gmacs_per_second() const { return per_second() * 1e-9; }
  // Sum of items whose layer name contains `fragment`.
  std::uint64_t Matching(const std::string &fragment) const;
};

MacReport CountMacs(const ModelConfig &cfg, double seconds = 1.0,
                    std::size_t start = 0);

// Parameter count implied by the config (matches RequiredTensors()).
std::uint64_t CountParameters(const ModelConfig &cfg);

}  // namespace cabinsep

#endif  // CABINSEP_MODEL_MACS_H_
