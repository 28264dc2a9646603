#ifndef CABINSEP_PIPELINE_ORACLE_H_
#define CABINSEP_PIPELINE_ORACLE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "cabinsep/augment/scene.h"
#include "cabinsep/irlab/ism.h"
#include "cabinsep/metrics/metrics.h"
#include "cabinsep/pipeline/separator.h"

namespace cabinsep {

// Simulated cabin scene for pipeline checks that need no trained model.
struct OracleSceneConfig {
  std::vector<std::size_t> speaker_zones{0, 2};  // 0-based
  double seconds = 3.0;
  double background_snr_db = 5.0;
  double beta = 0.7;
  double seat_jitter = 0.05;
  // Places the single talker here instead of at its seat (e.g. on a zone
  // boundary); requires exactly one speaker zone.
  std::optional<Vec3> position;
};

// Deterministic in `seed`: synthetic talkers at jittered seats, ISM IRs,
// cabin background noise at the requested SNR.
SceneManifest OracleSceneManifest(std::uint64_t seed, const OracleSceneConfig &cfg);

struct OracleRun {
  Scene scene;
  MultichannelWaveform separated;  // streaming MVDR with ideal ratio masks
  // MVDR output with the zone's own speech mask applied on top. Empty zones
  // come out silent here, whereas the beamformer passes them through.
  MultichannelWaveform post_masked;
  MvdrStats stats;
};

OracleRun RunOracle(std::uint64_t seed, const OracleSceneConfig &cfg,
                    const SeparatorConfig &sep = {});

struct ZoneGain {
  std::size_t zone = 0;
  double mixture_si_snr = 0.0;  // mixture at the zone's own mic vs label
  double output_si_snr = 0.0;
  double gain() const { return output_si_snr - mixture_si_snr; }
};

// SI-SNR improvement for every occupied zone.
std::vector<ZoneGain> OracleGains(const OracleRun &run);

double Median(std::vector<double> v);

}  // namespace cabinsep

#endif  // CABINSEP_PIPELINE_ORACLE_H_
