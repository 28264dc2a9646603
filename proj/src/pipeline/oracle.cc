#include "cabinsep/pipeline/oracle.h"

#include <algorithm>

#include "cabinsep/augment/synthetic.h"
#include "cabinsep/common.h"

namespace cabinsep {

SceneManifest OracleSceneManifest(std::uint64_t seed, const OracleSceneConfig &cfg) {
  if (cfg.speaker_zones.empty()) throw InvalidConfig("no speaker zones");
  if (cfg.position && cfg.speaker_zones.size() != 1)
    throw InvalidConfig("an explicit position needs exactly one speaker");
  Rng rng(seed);
  SceneManifest m;
  m.zones = CabinLayout::kZones;
  m.seed = seed;
  for (std::size_t zone : cfg.speaker_zones) {
    if (zone >= CabinLayout::kZones) throw InvalidConfig("zone outside the cabin");
    SpeakerEntry s;
    s.zone = zone;
    s.speech = SyntheticSpeech(rng, cfg.seconds, m.sample_rate);
    Vec3 where = cfg.position.value_or(CabinLayout::Seat(zone));
    where.x += Uniform(rng, -cfg.seat_jitter, cfg.seat_jitter);
    where.y += Uniform(rng, -cfg.seat_jitter, cfg.seat_jitter);
    where.z += Uniform(rng, -cfg.seat_jitter, cfg.seat_jitter);
    s.irs = SimulateCabinBundle(where, zone, cfg.beta).per_mic;
    m.speakers.push_back(std::move(s));
  }
  NoiseEntry bg;
  bg.samples = CabinNoise(rng, cfg.seconds, m.sample_rate);
  bg.snr_db = cfg.background_snr_db;
  m.background = std::move(bg);
  m.length = static_cast<std::size_t>(std::llround(cfg.seconds * m.sample_rate));
  m.Validate();
  return m;
}

OracleRun RunOracle(std::uint64_t seed, const OracleSceneConfig &cfg,
                    const SeparatorConfig &sep) {
  OracleRun run;
  run.scene = MixScene(OracleSceneManifest(seed, cfg));
  const MaskPair masks = OracleMasks(run.scene, sep.stft);
  const auto &y = run.scene.mixture;
  ComplexSpectrogram out = SeparateStream(Analyze(y, sep.stft), masks, sep.mvdr, &run.stats);
  run.separated = Synthesize(out, sep.stft, y.NumSamples(), y.sample_rate);
  for (std::size_t z = 0; z < out.channels(); ++z)
    for (std::size_t t = 0; t < out.frames(); ++t)
      for (std::size_t f = 0; f < out.bins(); ++f)
        out.at(z, t, f) *= masks.speech.at(z, t, f);
  run.post_masked = Synthesize(out, sep.stft, y.NumSamples(), y.sample_rate);
  return run;
}

std::vector<ZoneGain> OracleGains(const OracleRun &run) {
  std::vector<ZoneGain> out;
  for (std::size_t z = 0; z < run.scene.images.size(); ++z) {
    if (!run.scene.images[z]) continue;
    const Signal &label = run.scene.speech_labels.channels[z];
    ZoneGain g;
    g.zone = z;
    g.mixture_si_snr = SiSnr(run.scene.mixture.channels[z], label);
    g.output_si_snr = SiSnr(run.separated.channels[z], label);
    out.push_back(g);
  }
  return out;
}

double Median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace cabinsep
