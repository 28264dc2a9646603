#ifndef CABINSEP_DSP_WAV_H_
#define CABINSEP_DSP_WAV_H_

#include <string>

#include "cabinsep/dsp/waveform.h"

namespace cabinsep {

enum class WavFormat { kPcm16, kFloat32 };

// RIFF/WAVE, PCM 16-bit or IEEE float 32-bit, interleaved channels. Throws
// InvalidInput on anything else.
MultichannelWaveform ReadWav(const std::string &path);

void WriteWav(const std::string &path, const MultichannelWaveform &w,
              WavFormat format = WavFormat::kFloat32);

}  // namespace cabinsep

#endif  // CABINSEP_DSP_WAV_H_
