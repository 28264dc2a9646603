#ifndef CABINSEP_IRLAB_IR_SET_H_
#define CABINSEP_IRLAB_IR_SET_H_

#include <cstddef>
#include <string>
#include <vector>

#include "cabinsep/common.h"
#include "cabinsep/irlab/ism.h"

namespace cabinsep {

// Z microphone IRs measured or simulated for one source position.
struct IrBundle {
  std::size_t source_zone = 0;  // 0-based
  std::vector<ImpulseResponse> per_mic;
};

using IrSet = std::vector<IrBundle>;

enum class IrStrategy { kMixed, kAdded, kOnly, kSimulated };
std::string ToString(IrStrategy s);
IrStrategy ParseIrStrategy(const std::string &s);

// Probability that `added` uses recorded IRs on every channel.
inline constexpr double kAddedRecordedFraction = 0.25;

// Picks one bundle for `speaker_zone` from each required set (uniformly) and
// assembles the per-microphone IRs:
//   mixed     recorded at mic == speaker_zone, simulated elsewhere
//   added     all recorded with probability 0.25, otherwise all simulated
//   only      all recorded
//   simulated all simulated
// Throws InvalidInput when a required set has no bundle for the zone or the
// bundles disagree on the microphone count.
std::vector<ImpulseResponse> MixIrSets(const IrSet &simulated,
                                       const IrSet &recorded,
                                       IrStrategy strategy,
                                       std::size_t speaker_zone, Rng &rng);

// Float32 WAV plus a JSON sidecar (<path>.json) with zone, positions and
// origin.
void WriteImpulseResponse(const std::string &wav_path, const ImpulseResponse &ir);
ImpulseResponse ReadImpulseResponse(const std::string &wav_path);

}  // namespace cabinsep

#endif  // CABINSEP_IRLAB_IR_SET_H_
