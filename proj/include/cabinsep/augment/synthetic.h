#ifndef CABINSEP_AUGMENT_SYNTHETIC_H_
#define CABINSEP_AUGMENT_SYNTHETIC_H_

#include <utility>

#include "cabinsep/augment/scene.h"
#include "cabinsep/common.h"
#include "cabinsep/irlab/ir_set.h"

namespace cabinsep {

// Speech-like test signal: harmonic syllables with a moving pitch and
// formant envelope, occasional fricative bursts and pauses. Not speech, but
// sparse in time and frequency the way speech is, which is what mask-based
// separation relies on. RMS 0.05.
Signal SyntheticSpeech(Rng &rng, double seconds, int sample_rate = 16000);

// Low-pass dominated mono noise in the spirit of road and engine noise.
Signal SyntheticNoise(Rng &rng, double seconds, int sample_rate = 16000);

// Cabin background noise: SyntheticNoise radiated from a point near the
// floor at the front of the cabin into every microphone, plus independent
// sensor noise 25 dB below it.
MultichannelWaveform CabinNoise(Rng &rng, double seconds, int sample_rate = 16000);

// Short band-limited burst (door, indicator, bump), 0.2 to 0.6 s.
Signal TransientBurst(Rng &rng, int sample_rate = 16000);

struct SamplerConfig {
  std::size_t zones = CabinLayout::kZones;
  double seconds = 3.0;
  std::size_t max_speakers = CabinLayout::kZones;
  double transient_probability = 0.3;
  IrStrategy strategy = IrStrategy::kSimulated;
  std::pair<double, double> background_snr{kBackgroundSnrMin, kBackgroundSnrMax};
  std::pair<double, double> transient_snr{kTransientSnrMin, kTransientSnrMax};
  double beta = 0.7;
  // Random displacement of the seated source, per axis, in metres.
  double seat_jitter = 0.05;

  // Throws InvalidConfig when the SNR ranges leave the training bounds.
  void Validate() const;
};

// Draws a scene "on the fly": P uniform in [1, max_speakers] distinct zones,
// synthetic talkers, IRs via MixIrSets (the simulated set is produced with
// the image-source method when empty), cabin background noise and optional
// transients with SNRs uniform in the configured ranges. Deterministic in
// the state of `rng`.
SceneManifest SampleScene(Rng &rng, const SamplerConfig &cfg,
                          const IrSet &simulated = {},
                          const IrSet &recorded = {});

// ISM bundle for a source at `position` in the cabin preset.
IrBundle SimulateCabinBundle(const Vec3 &position, std::size_t source_zone,
                             double beta = 0.7);

}  // namespace cabinsep

#endif  // CABINSEP_AUGMENT_SYNTHETIC_H_
