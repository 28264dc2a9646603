// Acceptance suite. Prints one PASS/FAIL line per criterion with the measured
// quantity and wall time, and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cabinsep/augment/scene.h"
#include "cabinsep/augment/synthetic.h"
#include "cabinsep/common.h"
#include "cabinsep/dsp/convolve.h"
#include "cabinsep/dsp/stft.h"
#include "cabinsep/irlab/excitation.h"
#include "cabinsep/irlab/ir_set.h"
#include "cabinsep/irlab/ism.h"
#include "cabinsep/metrics/metrics.h"
#include "cabinsep/model/macs.h"
#include "cabinsep/model/network.h"
#include "cabinsep/model/weights.h"
#include "cabinsep/mvdr/mvdr.h"
#include "cabinsep/pipeline/oracle.h"
#include "cabinsep/pipeline/separator.h"

namespace cabinsep {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string Format(const char *fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Format(const char *fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

Signal Noise(Rng &rng, std::size_t n, double scale = 0.5) {
  Signal x(n);
  for (auto &v : x) v = scale * Gaussian(rng);
  return x;
}

Eigen::VectorXcd RandomVector(Rng &rng, Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {Gaussian(rng), Gaussian(rng)};
  return v;
}

Eigen::MatrixXcd RandomSpd(Rng &rng, Eigen::Index n) {
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {Gaussian(rng), Gaussian(rng)};
  return a * a.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(n, n);
}

double Correlation(const Signal &a, const Signal &b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

Signal DecayingIr(Rng &rng, std::size_t n) {
  Signal h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = Gaussian(rng) * std::exp(-static_cast<double>(i) / 30.0);
  return h;
}

// ------------------------------------------------------------------------

Outcome StftRoundTrip() {
  const StftConfig cfg;
  Rng rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4000 + UniformIndex(rng, 12000);
    auto y = MultichannelWaveform::Mono(Noise(rng, n));
    const auto back = Synthesize(Analyze(y, cfg), cfg, n);
    for (std::size_t i = cfg.window_length; i + cfg.window_length < n; ++i)
      worst = std::max(worst, std::abs(back.channels[0][i] - y.channels[0][i]));
  }
  return {worst < 1e-6, Format("max interior error %.2e over 50 signals (< 1e-6)", worst)};
}

Outcome MvdrDistortionless() {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index z = 2 + UniformIndex(rng, 5);
    const std::size_t ref = UniformIndex(rng, z);
    const Eigen::VectorXcd d = RandomVector(rng, z);
    const double sigma2 = 0.01 + UniformUnit(rng);
    const Eigen::MatrixXcd phi = sigma2 * d * d.adjoint();
    const Eigen::MatrixXcd psi = RandomSpd(rng, z);
    const auto r = ComputeMvdrWeights(phi, psi, ref, 1e-4);
    const Complex response = r.w.adjoint() * d;
    worst = std::max(worst, std::abs(response - d[ref]) / std::abs(d[ref]));
  }
  return {worst < 1e-6, Format("max |W^H d - d_ref| / |d_ref| = %.2e over 100 draws (< 1e-6)", worst)};
}

Outcome TraceInvariance() {
  Rng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index z = 2 + UniformIndex(rng, 5);
    const std::size_t ref = UniformIndex(rng, z);
    const Eigen::MatrixXcd phi = RandomSpd(rng, z), psi = RandomSpd(rng, z);
    const Eigen::VectorXcd w = ComputeMvdrWeights(phi, psi, ref, 1e-4).w;
    for (double c : {1e-3, 1e3}) {
      const Eigen::VectorXcd wc = ComputeMvdrWeights(c * phi, psi, ref, 1e-4).w;
      worst = std::max(worst, (wc - w).norm() / w.norm());
    }
  }
  return {worst < 1e-8, Format("max relative change %.2e over 100 trials (< 1e-8)", worst)};
}

Outcome OracleGain() {
  std::vector<double> gains;
  OracleSceneConfig cfg;  // zones 1 and 3, background at 5 dB
  for (std::uint64_t seed = 1000; seed < 1020; ++seed)
    for (const auto &g : OracleGains(RunOracle(seed, cfg))) gains.push_back(g.gain());
  const double median = Median(gains);
  const double lo = *std::min_element(gains.begin(), gains.end());
  return {median >= 5.0, Format("median SI-SNR gain %.2f dB over %zu zone outputs, min %.2f (>= 5 dB)",
                                median, gains.size(), lo)};
}

Outcome Causality() {
  Rng rng(5);
  const StftConfig stft;
  std::size_t checks = 0;
  for (const char *variant : {"S", "M", "L"}) {
    const ModelConfig cfg = ModelConfig::Preset(variant);
    const Network net(cfg, InitRandom(cfg, 42));
    const std::size_t n = 40 * stft.hop;
    MultichannelWaveform y(cfg.zones, n);
    for (auto &ch : y.channels) ch = Noise(rng, n, 0.1);
    const auto spec = Analyze(y, stft);
    const MaskPair masks = Forward(net, spec);
    const auto out = SeparateStream(spec, masks);
    for (int k = 0; k < 10; ++k) {
      const std::size_t cut = stft.window_length + UniformIndex(rng, n - stft.window_length);
      MultichannelWaveform p(cfg.zones, cut);
      for (std::size_t z = 0; z < cfg.zones; ++z)
        std::copy_n(y.channels[z].begin(), cut, p.channels[z].begin());
      const auto pspec = Analyze(p, stft);
      const MaskPair pm = Forward(net, pspec);
      const auto pout = SeparateStream(pspec, pm);
      // Frames lying wholly inside the truncated input.
      const std::size_t frames = (cut - stft.window_length) / stft.hop + 1;
      for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t z = 0; z < cfg.zones; ++z)
          for (std::size_t f = 0; f < cfg.bins; ++f) {
            if (pm.speech.at(z, t, f) != masks.speech.at(z, t, f) ||
                pm.noise.at(z, t, f) != masks.noise.at(z, t, f))
              return {false, Format("variant %s: mask differs at cut %zu frame %zu", variant, cut, t)};
            if (pout.at(z, t, f) != out.at(z, t, f))
              return {false, Format("variant %s: MVDR output differs at cut %zu frame %zu", variant, cut, t)};
          }
      ++checks;
    }
  }
  return {true, Format("%zu truncations across S/M/L bit-exact in masks and MVDR output", checks)};
}

Outcome MacAccounting() {
  const auto s = CountMacs(ModelConfig::Preset("S"));
  const double gmacs = s.gmacs_per_second();
  bool halving = true;
  std::string worst;
  for (const char *v : {"S", "M", "L"}) {
    ModelConfig with = ModelConfig::Preset(v), without = with;
    without.time_skip = false;
    for (double seconds : {1.0, 1.016, 3.0}) {
      const auto a = CountMacs(with, seconds), b = CountMacs(without, seconds);
      const double tac_with = static_cast<double>(a.Matching(".tac"));
      const double tac_without = static_cast<double>(b.Matching(".tac"));
      const double per_frame = tac_without / static_cast<double>(b.frames);
      // Twice the skipped count equals the full count, up to one odd frame.
      if (std::abs(2.0 * tac_with - tac_without) > per_frame + 1e-9) halving = false;
    }
  }
  const double ratio = static_cast<double>(
                           [] {
                             ModelConfig c = ModelConfig::Preset("S");
                             c.time_skip = false;
                             return CountMacs(c).Matching(".tac");
                           }()) /
                       static_cast<double>(s.Matching(".tac"));
  const bool pass = gmacs >= 0.2 && gmacs <= 0.8 && halving;
  return {pass, Format("S = %.3f GMACs/s (band [0.2, 0.8], reported 0.40); TAC ratio without/with skip %.3f, "
                       "2x within one odd frame: %s",
                       gmacs, ratio, halving ? "yes" : "no")};
}

Outcome MaskShapes() {
  Rng rng(7);
  for (const char *variant : {"S", "M", "L"}) {
    const ModelConfig cfg = ModelConfig::Preset(variant);
    const Network a(cfg, InitRandom(cfg, 9)), b(cfg, InitRandom(cfg, 9));
    for (std::size_t t : {1u, 7u, 100u}) {
      ComplexSpectrogram y(cfg.zones, t, cfg.bins);
      for (auto &v : y.data()) v = {Gaussian(rng), Gaussian(rng)};
      const MaskPair m1 = Forward(a, y), m2 = Forward(b, y);
      for (const Tensor3 *m : {&m1.speech, &m1.noise}) {
        if (m->channels() != cfg.zones || m->frames() != t || m->bins() != cfg.bins)
          return {false, Format("variant %s T=%zu: wrong shape", variant, t)};
        for (float v : m->data())
          if (!(v >= 0.0f && v <= 1.0f)) return {false, Format("variant %s T=%zu: mask %g", variant, t, v)};
      }
      if (!(m1.speech == m2.speech) || !(m1.noise == m2.noise))
        return {false, Format("variant %s T=%zu: not deterministic", variant, t)};
    }
  }
  return {true, "S/M/L x T in {1, 7, 100}: Z x T x F masks in [0, 1], identical across runs"};
}

Outcome IrRoundTrips() {
  Rng rng(8);
  const Signal h = DecayingIr(rng, 128);
  std::string detail;
  bool pass = true;
  for (auto kind : {ExcitationKind::kEss, ExcitationKind::kMls, ExcitationKind::kTsp}) {
    ExcitationSpec spec;
    spec.kind = kind;
    const double c = Correlation(ExtractIr(Convolve(GenerateExcitation(spec), h), spec, 128).taps, h);
    pass = pass && c > 0.99;
    detail += Format("%s %.4f, ", ToString(kind).c_str(), c);
  }
  ExcitationSpec ess;
  Signal rec = Convolve(GenerateExcitation(ess), h);
  double power = 0.0;
  for (double v : rec) power += v * v;
  const double sigma = std::sqrt(power / rec.size() / 100.0);  // 20 dB
  for (auto &v : rec) v += sigma * Gaussian(rng);
  const double noisy = Correlation(ExtractIr(rec, ess, 128).taps, h);
  pass = pass && noisy > 0.95;
  detail += Format("ESS at 20 dB %.4f; ", noisy);

  // Direct path: sub-sample peak by parabolic interpolation of the sinc kernel.
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    RoomSpec room;
    room.dimensions = {Uniform(rng, 2.0, 6.0), Uniform(rng, 2.0, 6.0), Uniform(rng, 2.0, 4.0)};
    auto inside = [&] {
      return Vec3{Uniform(rng, 0.1, room.dimensions.x - 0.1), Uniform(rng, 0.1, room.dimensions.y - 0.1),
                  Uniform(rng, 0.1, room.dimensions.z - 0.1)};
    };
    room.source = inside();
    room.mics = {inside()};
    room.max_order = 0;
    room.ir_length = 1024;
    const double delay = Distance(room.source, room.mics[0]) * room.sample_rate / room.speed_of_sound;
    const Signal taps = SimulateIsm(room, 0).taps;
    std::size_t k = 0;
    for (std::size_t i = 1; i < taps.size(); ++i)
      if (std::abs(taps[i]) > std::abs(taps[k])) k = i;
    double peak = static_cast<double>(k);
    if (k > 0 && k + 1 < taps.size()) {
      const double a = taps[k - 1], b = taps[k], c = taps[k + 1];
      const double denom = a - 2.0 * b + c;
      if (denom != 0.0) peak += 0.5 * (a - c) / denom;
    }
    worst = std::max(worst, std::abs(peak - delay));
  }
  pass = pass && worst <= 0.5;
  detail += Format("ISM direct-path delay error max %.3f samples over 100 geometries "
                   "(corr > 0.99, noisy > 0.95, delay <= 0.5)", worst);
  return {pass, detail};
}

IrSet LabelledSet(IrOrigin origin, std::size_t per_zone) {
  IrSet set;
  for (std::size_t z = 0; z < CabinLayout::kZones; ++z)
    for (std::size_t k = 0; k < per_zone; ++k) {
      IrBundle b;
      b.source_zone = z;
      for (std::size_t m = 0; m < CabinLayout::kZones; ++m) {
        ImpulseResponse ir;
        ir.taps = {1.0, static_cast<double>(k)};
        ir.origin = origin;
        ir.zone = z;
        b.per_mic.push_back(ir);
      }
      set.push_back(b);
    }
  return set;
}

Outcome Augmentation() {
  const IrSet sim = LabelledSet(IrOrigin::kSimulated, 3), rec = LabelledSet(IrOrigin::kRecorded, 3);
  Rng rng(9);
  bool mixed_ok = true;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t zone = i % CabinLayout::kZones;
    const auto irs = MixIrSets(sim, rec, IrStrategy::kMixed, zone, rng);
    for (std::size_t m = 0; m < irs.size(); ++m)
      mixed_ok = mixed_ok && ((irs[m].origin == IrOrigin::kRecorded) == (m == zone));
  }
  std::size_t all_recorded = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto irs = MixIrSets(sim, rec, IrStrategy::kAdded, i % CabinLayout::kZones, rng);
    all_recorded += std::all_of(irs.begin(), irs.end(),
                                [](const ImpulseResponse &ir) { return ir.origin == IrOrigin::kRecorded; });
  }
  const double fraction = all_recorded / 10000.0;

  double residual = 0.0, snr_error = 0.0;
  SamplerConfig cfg;
  cfg.seconds = 1.0;
  cfg.transient_probability = 0.0;
  for (int i = 0; i < 10; ++i) {
    const SceneManifest m = SampleScene(rng, cfg);
    const Scene s = MixScene(m);
    const std::size_t n = s.mixture.NumSamples();
    Signal speech0(n, 0.0);
    for (std::size_t c = 0; c < s.mixture.NumChannels(); ++c)
      for (std::size_t t = 0; t < n; ++t) {
        double r = s.mixture.channels[c][t] - s.noise.channels[c][t];
        for (const auto &img : s.images)
          if (img) r -= img->channels[c][t];
        residual = std::max(residual, std::abs(r));
      }
    for (const auto &img : s.images)
      if (img)
        for (std::size_t t = 0; t < n; ++t) speech0[t] += img->channels[0][t];
    const double snr = 10.0 * std::log10(Power(speech0) / Power(s.noise.channels[0]));
    snr_error = std::max(snr_error, std::abs(snr - m.background->snr_db));
  }
  const bool pass = mixed_ok && std::abs(fraction - 0.25) <= 0.02 && residual < 1e-6 && snr_error < 1e-3;
  return {pass, Format("mixed recorded-at-speaker-mic only: %s; added all-recorded %.4f (0.25 +- 0.02); "
                       "additivity residual %.2e (< 1e-6); SNR error %.2e dB (< 1e-3)",
                       mixed_ok ? "yes" : "no", fraction, residual, snr_error)};
}

Outcome Positioning() {
  std::vector<PositioningEntry> standard, boundary;
  OracleSceneConfig cfg;
  for (std::uint64_t i = 0; i < 50; ++i) {
    cfg.speaker_zones = {i % CabinLayout::kZones};
    cfg.position.reset();
    standard.push_back(ZonePositioning(RunOracle(2000 + i, cfg).post_masked.channels, i % CabinLayout::kZones));
    cfg.speaker_zones = {0};
    cfg.position = CabinLayout::FrontBoundary();
    boundary.push_back(ZonePositioning(RunOracle(3000 + i, cfg).post_masked.channels, 0, true));
  }
  const auto s = Summarize(standard);
  const auto b = Summarize(boundary);
  const double nspa = b.nspa().value_or(0.0);
  return {s.accuracy() == 1.0 && s.undecided == 0,
          Format("standard posture %zu/%zu correct (100%% required); boundary NSPA %.2f reported only",
                 s.correct, s.decided + s.undecided, nspa)};
}

Outcome RtfOrdering() {
  const double seconds = 4.0;
  Rng rng(11);
  std::vector<double> rtf;
  std::string detail;
  for (const char *variant : {"S", "M", "L"}) {
    const ModelConfig cfg = ModelConfig::Preset(variant);
    const Network net(cfg, InitRandom(cfg, 1));
    MultichannelWaveform y(cfg.zones, static_cast<std::size_t>(seconds * 16000));
    for (auto &ch : y.channels) ch = Noise(rng, ch.size(), 0.1);
    const auto r = MeasureRtf([&] { Separate(net, y); }, seconds, 5);
    rtf.push_back(r.median);
    detail += Format("%s %.3f [%.3f, %.3f], ", variant, r.median, r.min, r.max);
  }
  detail += "single thread; 0.21 on the SA8295P is not asserted";
  return {rtf[0] <= rtf[1] && rtf[1] <= rtf[2], "RTF " + detail};
}

}  // namespace
}  // namespace cabinsep

int main() {
  using namespace cabinsep;
  const std::vector<Criterion> criteria = {
      {1, "STFT round trip", 5.0, StftRoundTrip},
      {2, "MVDR distortionless algebra", 5.0, MvdrDistortionless},
      {3, "Trace-normalization invariance", 5.0, TraceInvariance},
      {4, "Oracle-mask end-to-end gain", 120.0, OracleGain},
      {5, "Causality suite", 120.0, Causality},
      {6, "MAC accounting", 1.0, MacAccounting},
      {7, "Mask/shape suite", 60.0, MaskShapes},
      {8, "IR round trips", 60.0, IrRoundTrips},
      {9, "Augmentation strategies", 60.0, Augmentation},
      {10, "Positioning protocol", 120.0, Positioning},
      {11, "RTF harness", 300.0, RtfOrdering},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    const auto begin = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    const bool in_time = elapsed <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s [%d] %s: %s; %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), elapsed, c.budget_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
