#include "cabinsep/augment/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cabinsep/dsp/convolve.h"

namespace cabinsep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void NormalizeRms(Signal &x, double rms) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e <= 0.0) return;
  const double g = rms / std::sqrt(e / static_cast<double>(x.size()));
  for (auto &v : x) v *= g;
}

void OnePoleLowpass(Signal &x, double a) {
  double y = 0.0;
  for (auto &v : x) {
    y = a * y + (1.0 - a) * v;
    v = y;
  }
}

double Formant(double f, double centre, double width) {
  const double d = (f - centre) / width;
  return std::exp(-0.5 * d * d);
}

}  // namespace

Signal SyntheticSpeech(Rng &rng, double seconds, int rate) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  Signal out(n, 0.0);
  const double base_f0 = Uniform(rng, 95.0, 230.0);
  std::size_t pos = UniformIndex(rng, static_cast<std::size_t>(0.15 * rate));
  while (pos < n) {
    const auto len = static_cast<std::size_t>(Uniform(rng, 0.12, 0.45) * rate);
    const double f1 = Uniform(rng, 300.0, 850.0);
    const double f2 = Uniform(rng, 900.0, 2300.0);
    const double f3 = Uniform(rng, 2400.0, 3200.0);
    const double f0_start = base_f0 * Uniform(rng, 0.85, 1.15);
    const double f0_slope = base_f0 * Uniform(rng, -0.3, 0.3);
    const double level = Uniform(rng, 0.5, 1.0);
    double phase = 0.0;
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double u = static_cast<double>(i) / len;
      const double f0 = f0_start + f0_slope * u;
      phase += kTwoPi * f0 / rate;
      const double env = std::sin(std::numbers::pi * u);
      double acc = 0.0;
      for (int k = 1; k * f0 < 0.45 * rate; ++k) {
        const double f = k * f0;
        const double g = (Formant(f, f1, 90.0) + 0.6 * Formant(f, f2, 120.0) +
                          0.3 * Formant(f, f3, 180.0) + 0.02) / k;
        acc += g * std::sin(k * phase);
      }
      out[pos + i] += level * env * env * acc;
    }
    // Fricative onset on some syllables.
    if (UniformUnit(rng) < 0.35) {
      const auto flen = static_cast<std::size_t>(Uniform(rng, 0.03, 0.09) * rate);
      double prev = 0.0;
      for (std::size_t i = 0; i < flen && pos + i < n; ++i) {
        const double w = Gaussian(rng);
        const double hp = w - prev;  // first difference: high-pass tilt
        prev = w;
        out[pos + i] += 0.08 * std::sin(std::numbers::pi * i / flen) * hp;
      }
    }
    pos += len;
    if (UniformUnit(rng) < 0.4) pos += static_cast<std::size_t>(Uniform(rng, 0.05, 0.35) * rate);
  }
  NormalizeRms(out, 0.05);
  return out;
}

Signal SyntheticNoise(Rng &rng, double seconds, int rate) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  Signal low(n), white(n);
  for (auto &v : low) v = Gaussian(rng);
  for (auto &v : white) v = Gaussian(rng);
  OnePoleLowpass(low, 0.97);
  NormalizeRms(low, 1.0);
  for (std::size_t i = 0; i < n; ++i) low[i] += 0.15 * white[i];
  NormalizeRms(low, 0.05);
  return low;
}

MultichannelWaveform CabinNoise(Rng &rng, double seconds, int rate) {
  const Signal src = SyntheticNoise(rng, seconds, rate);
  auto room = CabinLayout::Room({0.3, 0.75, 0.35});
  room.sample_rate = rate;
  const auto irs = SimulateIsmAll(room);
  MultichannelWaveform out(irs.size(), src.size(), rate);
  double power = 0.0;
  for (std::size_t m = 0; m < irs.size(); ++m) {
    Signal y = Convolve(src, irs[m].taps);
    y.resize(src.size());
    for (double v : y) power += v * v;
    out.channels[m] = std::move(y);
  }
  const double sensor =
      std::sqrt(power / (irs.size() * src.size()) * std::pow(10.0, -2.5));
  for (auto &ch : out.channels)
    for (auto &v : ch) v += sensor * Gaussian(rng);
  return out;
}

Signal TransientBurst(Rng &rng, int rate) {
  const auto n = static_cast<std::size_t>(Uniform(rng, 0.2, 0.6) * rate);
  const double centre = Uniform(rng, 200.0, 3000.0);
  const double r = 0.995;
  const double c = 2.0 * r * std::cos(kTwoPi * centre / rate);
  Signal out(n);
  double y1 = 0.0, y2 = 0.0;
  const double decay = Uniform(rng, 0.05, 0.2) * rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = Gaussian(rng) + c * y1 - r * r * y2;
    y2 = y1;
    y1 = y;
    out[i] = y * std::exp(-static_cast<double>(i) / decay);
  }
  NormalizeRms(out, 0.05);
  return out;
}

void SamplerConfig::Validate() const {
  if (zones == 0 || max_speakers == 0 || max_speakers > zones)
    throw InvalidConfig("max_speakers must lie in [1, zones]");
  if (!(seconds > 0.0)) throw InvalidConfig("scene duration must be positive");
  auto in = [](std::pair<double, double> r, double lo, double hi) {
    return r.first <= r.second && r.first >= lo && r.second <= hi;
  };
  if (!in(background_snr, kBackgroundSnrMin, kBackgroundSnrMax))
    throw InvalidConfig("background SNR range must lie within [-20, 25] dB");
  if (!in(transient_snr, kTransientSnrMin, kTransientSnrMax))
    throw InvalidConfig("transient SNR range must lie within [-5, 5] dB");
  if (!(transient_probability >= 0.0 && transient_probability <= 1.0))
    throw InvalidConfig("transient probability must lie in [0, 1]");
}

IrBundle SimulateCabinBundle(const Vec3 &position, std::size_t source_zone,
                             double beta) {
  IrBundle b;
  b.source_zone = source_zone;
  b.per_mic = SimulateIsmAll(CabinLayout::Room(position, beta));
  for (auto &ir : b.per_mic) ir.zone = source_zone;
  return b;
}

SceneManifest SampleScene(Rng &rng, const SamplerConfig &cfg,
                          const IrSet &simulated, const IrSet &recorded) {
  cfg.Validate();
  SceneManifest m;
  m.zones = cfg.zones;
  m.seed = rng();
  const std::size_t p = 1 + UniformIndex(rng, cfg.max_speakers);
  std::vector<std::size_t> zones(cfg.zones);
  for (std::size_t i = 0; i < zones.size(); ++i) zones[i] = i;
  for (std::size_t i = 0; i < p; ++i)
    std::swap(zones[i], zones[i + UniformIndex(rng, zones.size() - i)]);
  zones.resize(p);
  std::sort(zones.begin(), zones.end());

  for (std::size_t zone : zones) {
    SpeakerEntry s;
    s.zone = zone;
    s.speech = SyntheticSpeech(rng, cfg.seconds, m.sample_rate);
    s.gain = std::pow(10.0, Uniform(rng, -3.0, 3.0) / 20.0);
    IrSet sim = simulated;
    if (sim.empty() && cfg.strategy != IrStrategy::kOnly) {
      if (zone >= CabinLayout::kZones)
        throw InvalidConfig("the cabin preset only has four zones");
      Vec3 seat = CabinLayout::Seat(zone);
      seat.x += Uniform(rng, -cfg.seat_jitter, cfg.seat_jitter);
      seat.y += Uniform(rng, -cfg.seat_jitter, cfg.seat_jitter);
      seat.z += Uniform(rng, -cfg.seat_jitter, cfg.seat_jitter);
      sim.push_back(SimulateCabinBundle(seat, zone, cfg.beta));
    }
    s.irs = MixIrSets(sim, recorded, cfg.strategy, zone, rng);
    m.speakers.push_back(std::move(s));
  }

  NoiseEntry bg;
  bg.samples = CabinNoise(rng, cfg.seconds, m.sample_rate);
  bg.snr_db = Uniform(rng, cfg.background_snr.first, cfg.background_snr.second);
  m.background = std::move(bg);

  if (UniformUnit(rng) < cfg.transient_probability) {
    NoiseEntry t;
    t.samples = MultichannelWaveform::Mono(TransientBurst(rng, m.sample_rate), m.sample_rate);
    Vec3 where{Uniform(rng, 0.2, 2.6), Uniform(rng, 0.1, 1.4), Uniform(rng, 0.2, 1.0)};
    t.irs = SimulateIsmAll(CabinLayout::Room(where, cfg.beta));
    t.snr_db = Uniform(rng, cfg.transient_snr.first, cfg.transient_snr.second);
    const auto scene_len = static_cast<std::size_t>(cfg.seconds * m.sample_rate);
    t.onset = UniformIndex(rng, scene_len / 2);
    m.transients.push_back(std::move(t));
  }
  m.length = static_cast<std::size_t>(std::llround(cfg.seconds * m.sample_rate));
  m.Validate();
  return m;
}

}  // namespace cabinsep
