#ifndef CABINSEP_PIPELINE_SEPARATOR_H_
#define CABINSEP_PIPELINE_SEPARATOR_H_

#include <deque>
#include <vector>

#include "cabinsep/dsp/stft.h"
#include "cabinsep/dsp/waveform.h"
#include "cabinsep/model/network.h"
#include "cabinsep/mvdr/mvdr.h"

namespace cabinsep {

struct SeparatorConfig {
  StftConfig stft;
  MvdrConfig mvdr;
  std::size_t start = 0;  // time-skip phase
};

struct SeparationResult {
  MultichannelWaveform zones;  // zone i in channel i, input length
  MaskPair masks;
  MvdrStats stats;
};

// Whole-utterance inference: STFT, masks, streaming MVDR, iSTFT.
SeparationResult Separate(const Network &net, const MultichannelWaveform &y,
                          const SeparatorConfig &cfg = {});

// MVDR driven by externally supplied masks (e.g. oracle masks).
MultichannelWaveform BeamformWithMasks(const MultichannelWaveform &y,
                                       const MaskPair &masks,
                                       const SeparatorConfig &cfg = {},
                                       MvdrStats *stats = nullptr);

// Chunked real-time path. Each frame is analysed once its last sample has
// arrived; outputs are released `hop` samples per frame. Concatenating
// every Push() and the final Flush() reproduces Separate() exactly.
class StreamingSeparator {
 public:
  StreamingSeparator(const Network &net, const SeparatorConfig &cfg = {});

  // `chunk` has Z channels of any (equal) length; returns Z channels of the
  // samples finalized by it.
  MultichannelWaveform Push(const MultichannelWaveform &chunk);
  // Pads the tail and returns the remaining samples, trimmed so the total
  // output length equals the total input length.
  MultichannelWaveform Flush();

  MvdrStats stats() const;
  std::size_t frames_processed() const { return model_.frames_processed(); }

 private:
  MultichannelWaveform Process(std::vector<std::vector<std::vector<Complex>>> frames);
  MultichannelWaveform Take(MultichannelWaveform out);

  const Network &net_;
  SeparatorConfig cfg_;
  std::size_t zones_, bins_;
  std::deque<StreamingAnalyzer> analyzers_;  // not movable
  std::deque<StreamingSynthesizer> synthesizers_;
  ModelStream model_;
  StreamingBeamformer beamformer_;
  std::size_t received_ = 0, emitted_ = 0;
};

}  // namespace cabinsep

#endif  // CABINSEP_PIPELINE_SEPARATOR_H_
