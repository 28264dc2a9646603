#include "cabinsep/metrics/metrics.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void CheckSameLength(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidInput("signals differ in length");
}

}  // namespace

double SiSnr(std::span<const double> estimate, std::span<const double> target) {
  CheckSameLength(estimate.size(), target.size());
  double et = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    et += estimate[i] * target[i];
    tt += target[i] * target[i];
  }
  if (!(tt > 0.0)) throw InvalidInput("SI-SNR target is silent");
  const double a = et / tt;
  double ps = 0.0, pr = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double s = a * target[i];
    const double r = estimate[i] - s;
    ps += s * s;
    pr += r * r;
  }
  if (pr <= 0.0) return kSiSnrClampDb;
  if (ps <= 0.0) return -kSiSnrClampDb;
  return std::clamp(10.0 * std::log10(ps / pr), -kSiSnrClampDb, kSiSnrClampDb);
}

std::vector<std::vector<double>> MelFilterbank(const FbankConfig &cfg) {
  cfg.stft.Validate();
  if (cfg.mel_bands == 0 || !(cfg.low_hz >= 0.0 && cfg.low_hz < cfg.high_hz) ||
      cfg.high_hz > cfg.sample_rate / 2.0)
    throw InvalidConfig("bad filterbank band edges");
  const std::size_t bins = cfg.stft.bins();
  const double lo = HzToMel(cfg.low_hz), hi = HzToMel(cfg.high_hz);
  std::vector<double> edges(cfg.mel_bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = MelToHz(lo + (hi - lo) * static_cast<double>(i) / (cfg.mel_bands + 1));
  std::vector<std::vector<double>> fb(cfg.mel_bands, std::vector<double>(bins, 0.0));
  for (std::size_t m = 0; m < cfg.mel_bands; ++m)
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.stft.fft_size;
      const double up = (f - edges[m]) / (edges[m + 1] - edges[m]);
      const double down = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      fb[m][k] = std::max(0.0, std::min(up, down));
    }
  return fb;
}

std::vector<std::vector<double>> LogMelFbank(std::span<const double> x,
                                             const FbankConfig &cfg) {
  const auto fb = MelFilterbank(cfg);
  const auto spec = Analyze(MultichannelWaveform::Mono(Signal(x.begin(), x.end()),
                                                       cfg.sample_rate),
                            cfg.stft);
  std::vector<std::vector<double>> out(spec.frames(), std::vector<double>(fb.size()));
  std::vector<double> power(spec.bins());
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    for (std::size_t k = 0; k < spec.bins(); ++k) power[k] = std::norm(spec.at(0, t, k));
    for (std::size_t m = 0; m < fb.size(); ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += fb[m][k] * power[k];
      out[t][m] = std::log(std::max(e, cfg.log_floor));
    }
  }
  return out;
}

double FbankMae(std::span<const double> a, std::span<const double> b,
                const FbankConfig &cfg) {
  CheckSameLength(a.size(), b.size());
  const auto fa = LogMelFbank(a, cfg), fb = LogMelFbank(b, cfg);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < fa.size(); ++t)
    for (std::size_t m = 0; m < fa[t].size(); ++m) {
      sum += std::abs(fa[t][m] - fb[t][m]);
      ++count;
    }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double FbankMae(const MultichannelWaveform &a, const MultichannelWaveform &b,
                const FbankConfig &cfg) {
  if (a.NumChannels() != b.NumChannels() || a.NumChannels() == 0)
    throw InvalidInput("channel counts differ");
  double sum = 0.0;
  for (std::size_t c = 0; c < a.NumChannels(); ++c)
    sum += FbankMae(a.channels[c], b.channels[c], cfg);
  return sum / static_cast<double>(a.NumChannels());
}

void LossWeights::Validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0))
    throw InvalidConfig("loss weights must be >= 0");
}

LossTerms CombinedLoss(const MultichannelWaveform &s,
                       const MultichannelWaveform &s_label,
                       const MultichannelWaveform &n,
                       const MultichannelWaveform &n_label, const LossWeights &w,
                       const FbankConfig &cfg) {
  w.Validate();
  if (s.NumChannels() != s_label.NumChannels() || s.NumChannels() == 0)
    throw InvalidInput("speech channel counts differ");
  LossTerms terms;
  terms.speech_fbank = FbankMae(s, s_label, cfg);
  double snr = 0.0;
  for (std::size_t c = 0; c < s.NumChannels(); ++c)
    snr += SiSnr(s.channels[c], s_label.channels[c]);
  terms.si_snr = snr / static_cast<double>(s.NumChannels());
  terms.noise_fbank = FbankMae(n, n_label, cfg);
  terms.total = w.alpha * terms.speech_fbank - w.beta * terms.si_snr +
                w.gamma * terms.noise_fbank;
  return terms;
}

PositioningEntry ZonePositioning(const std::vector<Signal> &separated,
                                 std::size_t true_zone, bool non_standard) {
  if (separated.empty()) throw InvalidInput("no zone outputs");
  if (true_zone >= separated.size()) throw InvalidInput("true zone out of range");
  PositioningEntry e;
  e.true_zone = true_zone;
  e.non_standard = non_standard;
  double best = 0.0;
  for (std::size_t z = 0; z < separated.size(); ++z) {
    double energy = 0.0;
    for (double v : separated[z]) energy += v * v;
    const double rms =
        separated[z].empty() ? 0.0 : std::sqrt(energy / separated[z].size());
    if (rms > best) {
      best = rms;
      e.predicted = z;
    }
  }
  return e;
}

double PositioningReport::accuracy() const {
  return decided ? static_cast<double>(correct) / decided : 0.0;
}

std::optional<double> PositioningReport::nspa() const {
  if (!non_standard_decided) return std::nullopt;
  return static_cast<double>(non_standard_correct) / non_standard_decided;
}

PositioningReport Summarize(const std::vector<PositioningEntry> &entries) {
  PositioningReport r;
  for (const auto &e : entries) {
    if (!e.predicted) {
      ++r.undecided;
      continue;
    }
    ++r.decided;
    r.correct += e.correct();
    if (e.non_standard) {
      ++r.non_standard_decided;
      r.non_standard_correct += e.correct();
    }
  }
  return r;
}

RtfResult MeasureRtf(const std::function<void()> &process, double audio_seconds,
                     std::size_t runs) {
  if (!(audio_seconds > 0.0)) throw InvalidInput("audio duration must be positive");
  runs = std::max<std::size_t>(runs, 5);
  using Clock = std::chrono::steady_clock;
  process();
  RtfResult r;
  for (std::size_t i = 0; i < runs; ++i) {
    const auto start = Clock::now();
    process();
    const std::chrono::duration<double> dt = Clock::now() - start;
    r.runs.push_back(dt.count() / audio_seconds);
  }
  auto sorted = r.runs;
  std::sort(sorted.begin(), sorted.end());
  r.min = sorted.front();
  r.max = sorted.back();
  const std::size_t n = sorted.size();
  r.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return r;
}

}  // namespace cabinsep
