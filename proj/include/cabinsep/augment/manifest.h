#ifndef CABINSEP_AUGMENT_MANIFEST_H_
#define CABINSEP_AUGMENT_MANIFEST_H_

#include <string>

#include "cabinsep/augment/scene.h"

namespace cabinsep {

// JSON scene manifest. Zones are 1-based on disk. Relative file paths are
// resolved against `base_dir`. A speaker or noise entry takes its IRs either
// from "irs" (one WAV per microphone) or from "ism" ({"source": [x, y, z],
// "beta": 0.7, "order": 10}), simulated in the cabin preset.
//
// {
//   "sample_rate": 16000, "zones": 4, "seed": 1, "length": 48000,
//   "training_snr_ranges": true,
//   "speakers": [{"zone": 1, "speech": "a.wav", "gain": 1.0,
//                 "ism": {"source": [1.05, 0.42, 0.9]}}],
//   "background": {"file": "noise.wav", "snr_db": 5},
//   "transients": [{"file": "door.wav", "onset": 16000, "snr_db": 0}]
// }
//
// Throws InvalidManifest for malformed content and InvalidInput for
// unreadable audio.
SceneManifest ParseManifest(const std::string &json_text,
                            const std::string &base_dir = ".");
SceneManifest LoadManifest(const std::string &path);

// Writes the file references of `m` (not the samples).
std::string FormatManifest(const SceneManifest &m);

}  // namespace cabinsep

#endif  // CABINSEP_AUGMENT_MANIFEST_H_
