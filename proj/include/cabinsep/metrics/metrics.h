#ifndef CABINSEP_METRICS_METRICS_H_
#define CABINSEP_METRICS_METRICS_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cabinsep/dsp/stft.h"
#include "cabinsep/dsp/waveform.h"

namespace cabinsep {

inline constexpr double kSiSnrClampDb = 60.0;

// Scale-invariant SNR without mean removal, clamped to +-60 dB. Throws
// InvalidInput for unequal lengths or a silent target.
double SiSnr(std::span<const double> estimate, std::span<const double> target);

struct FbankConfig {
  StftConfig stft;
  std::size_t mel_bands = 80;
  double low_hz = 0.0;
  double high_hz = 8000.0;
  int sample_rate = 16000;
  double log_floor = 1e-10;
};

// HTK-style triangular filters on the mel scale, [mel_bands][bins].
std::vector<std::vector<double>> MelFilterbank(const FbankConfig &cfg);

// log(max(mel energy, floor)), [frames][bands].
std::vector<std::vector<double>> LogMelFbank(std::span<const double> x,
                                             const FbankConfig &cfg = {});

// Mean absolute difference of log-mel features over all frames and bands.
double FbankMae(std::span<const double> a, std::span<const double> b,
                const FbankConfig &cfg = {});
// Mean of the per-channel values.
double FbankMae(const MultichannelWaveform &a, const MultichannelWaveform &b,
                const FbankConfig &cfg = {});

struct LossWeights {
  double alpha = 0.01;
  double beta = 1.0;
  double gamma = 0.01;
  void Validate() const;  // all >= 0, else InvalidConfig
};

struct LossTerms {
  double speech_fbank = 0.0;
  double si_snr = 0.0;  // mean over channels, dB
  double noise_fbank = 0.0;
  double total = 0.0;
};

// alpha * FBank-MAE(S, S_label) - beta * SI-SNR(S, S_label)
// + gamma * FBank-MAE(N, N_label), SI-SNR averaged over channels.
LossTerms CombinedLoss(const MultichannelWaveform &s,
                       const MultichannelWaveform &s_label,
                       const MultichannelWaveform &n,
                       const MultichannelWaveform &n_label,
                       const LossWeights &w = {}, const FbankConfig &cfg = {});

struct PositioningEntry {
  std::size_t true_zone = 0;
  std::optional<std::size_t> predicted;  // nullopt: undecided (all silent)
  bool non_standard = false;
  bool correct() const { return predicted && *predicted == true_zone; }
};

// Argmax of per-zone output RMS; ties go to the lowest zone.
PositioningEntry ZonePositioning(const std::vector<Signal> &separated,
                                 std::size_t true_zone,
                                 bool non_standard = false);

struct PositioningReport {
  std::size_t decided = 0, undecided = 0, correct = 0;
  std::size_t non_standard_decided = 0, non_standard_correct = 0;
  double accuracy() const;
  // Accuracy over the non-standard-posture subset; nullopt if it is empty.
  std::optional<double> nspa() const;
};
PositioningReport Summarize(const std::vector<PositioningEntry> &entries);

struct RtfResult {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> runs;
};

// Calls `process` once to warm up, then `runs` (>= 5) timed times, and reports
// wall time over `audio_seconds`. The caller runs single-threaded work.
RtfResult MeasureRtf(const std::function<void()> &process, double audio_seconds,
                     std::size_t runs = 5);

}  // namespace cabinsep

#endif  // CABINSEP_METRICS_METRICS_H_
