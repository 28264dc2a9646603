#ifndef CABINSEP_AUGMENT_SCENE_H_
#define CABINSEP_AUGMENT_SCENE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cabinsep/dsp/stft.h"
#include "cabinsep/dsp/waveform.h"
#include "cabinsep/irlab/ism.h"
#include "cabinsep/tensor.h"

namespace cabinsep {

inline constexpr double kBackgroundSnrMin = -20.0, kBackgroundSnrMax = 25.0;
inline constexpr double kTransientSnrMin = -5.0, kTransientSnrMax = 5.0;

struct SpeakerEntry {
  std::size_t zone = 0;  // 0-based; manifests on disk are 1-based
  std::string speech_file;
  std::vector<std::string> ir_files;
  double gain = 1.0;
  // Loaded or generated data used by MixScene.
  Signal speech;
  std::vector<ImpulseResponse> irs;
};

// A noise recording. Z channels are used as they are; a mono signal is
// rendered through `irs` when given, otherwise copied to every microphone.
struct NoiseEntry {
  std::string file;
  std::vector<std::string> ir_files;
  double snr_db = 0.0;
  std::size_t onset = 0;  // samples; transients only
  MultichannelWaveform samples;
  std::vector<ImpulseResponse> irs;
};

struct SceneManifest {
  int sample_rate = 16000;
  std::size_t zones = 4;
  std::vector<SpeakerEntry> speakers;
  std::optional<NoiseEntry> background;
  std::vector<NoiseEntry> transients;
  std::uint64_t seed = 0;
  std::optional<std::size_t> length;  // samples; default fits every render
  bool training_snr_ranges = true;

  // Throws InvalidManifest for zone collisions, P outside [1, Z], SNRs
  // outside the enabled ranges or missing data.
  void Validate() const;
};

struct Scene {
  MultichannelWaveform mixture;
  // Channel z: zone z's reverberant speech at microphone z (zero if empty).
  MultichannelWaveform speech_labels;
  // Total noise at every microphone.
  MultichannelWaveform noise;
  // Full Z-channel image of every occupied zone, indexed by zone.
  std::vector<std::optional<MultichannelWaveform>> images;
};

// Channel i = s * irs[i]; every channel has length len(s) + max_len(ir) - 1.
// Throws InvalidInput when irs.size() != zones.
MultichannelWaveform RenderReverberant(std::span<const double> s,
                                       const std::vector<ImpulseResponse> &irs,
                                       std::size_t zones, int sample_rate = 16000);

// Noise scaled so that 10 log10(P_signal / P_noise) == target_snr_db, powers
// taken over the full spans given. Throws InvalidInput for silent inputs.
Signal SnrScale(std::span<const double> signal, std::span<const double> noise,
                double target_snr_db);
double SnrScaleFactor(std::span<const double> signal,
                      std::span<const double> noise, double target_snr_db);

// y_i = sum_z x_i(z) + v_i. The SNR reference is microphone 0: the speech
// sum against each noise component there. A background is tiled to the
// scene length; transients cover [onset, onset + len) and their SNR is
// measured over that span.
Scene MixScene(const SceneManifest &manifest);

// Ideal ratio masks from a scene's ground truth, referenced to each zone's
// own microphone: M_S[i] = |X_ii| / (sum_j |X_ji| + |V_i|), M_N[i] =
// |V_i| / (same). Empty zones get zero speech masks.
MaskPair OracleMasks(const Scene &scene, const StftConfig &cfg = {});

}  // namespace cabinsep

#endif  // CABINSEP_AUGMENT_SCENE_H_
