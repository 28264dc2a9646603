#include "cabinsep/augment/scene.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "cabinsep/common.h"
#include "cabinsep/dsp/convolve.h"

namespace cabinsep {

namespace {

double MeanPower(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double e = 0.0;
  for (double v : x) e += v * v;
  return e / static_cast<double>(x.size());
}

void Fit(Signal &x, std::size_t n) { x.resize(n, 0.0); }

Signal Tile(const Signal &x, std::size_t n) {
  Signal out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i % x.size()];
  return out;
}

void CheckNoise(const NoiseEntry &n, std::size_t zones, const char *what) {
  if (n.samples.Empty())
    throw InvalidManifest(std::string(what) + " noise has no samples");
  const std::size_t ch = n.samples.NumChannels();
  if (ch != 1 && ch != zones)
    throw InvalidManifest(std::string(what) + " noise must be mono or Z-channel");
  if (!n.irs.empty() && (ch != 1 || n.irs.size() != zones))
    throw InvalidManifest(std::string(what) + " noise IRs need a mono source and Z IRs");
}

// Noise at every microphone, `n` samples long.
MultichannelWaveform RenderNoise(const NoiseEntry &e, std::size_t zones,
                                 std::size_t n, bool tile, int rate) {
  MultichannelWaveform out(zones, n, rate);
  auto source = [&](std::size_t ch) {
    Signal s = e.samples.channels[ch];
    if (tile) return Tile(s, n);
    Fit(s, n);
    return s;
  };
  if (e.samples.NumChannels() == zones && e.irs.empty()) {
    for (std::size_t m = 0; m < zones; ++m) out.channels[m] = source(m);
    return out;
  }
  const Signal mono = source(0);
  for (std::size_t m = 0; m < zones; ++m) {
    if (e.irs.empty()) {
      out.channels[m] = mono;
    } else {
      out.channels[m] = Convolve(mono, e.irs[m].taps);
      Fit(out.channels[m], n);
    }
  }
  return out;
}

}  // namespace

void SceneManifest::Validate() const {
  if (zones == 0) throw InvalidManifest("zones must be positive");
  if (sample_rate <= 0) throw InvalidManifest("sample rate must be positive");
  if (speakers.empty() || speakers.size() > zones)
    throw InvalidManifest("speaker count must lie in [1, Z]");
  std::set<std::size_t> seen;
  for (const auto &s : speakers) {
    if (s.zone >= zones) throw InvalidManifest("speaker zone out of range");
    if (!seen.insert(s.zone).second)
      throw InvalidManifest("two speakers in zone " + std::to_string(s.zone + 1));
    if (s.speech.empty()) throw InvalidManifest("speaker has no speech samples");
    if (s.irs.size() != zones) throw InvalidManifest("speaker needs one IR per microphone");
    if (!std::isfinite(s.gain)) throw InvalidManifest("speaker gain must be finite");
  }
  if (background) {
    CheckNoise(*background, zones, "background");
    if (training_snr_ranges &&
        (background->snr_db < kBackgroundSnrMin || background->snr_db > kBackgroundSnrMax))
      throw InvalidManifest("background SNR outside [-20, 25] dB");
  }
  for (const auto &t : transients) {
    CheckNoise(t, zones, "transient");
    if (training_snr_ranges && (t.snr_db < kTransientSnrMin || t.snr_db > kTransientSnrMax))
      throw InvalidManifest("transient SNR outside [-5, 5] dB");
  }
  if (length && *length == 0) throw InvalidManifest("scene length must be positive");
}

MultichannelWaveform RenderReverberant(std::span<const double> s,
                                       const std::vector<ImpulseResponse> &irs,
                                       std::size_t zones, int sample_rate) {
  if (irs.size() != zones)
    throw InvalidInput("expected " + std::to_string(zones) + " IRs, got " +
                       std::to_string(irs.size()));
  if (s.empty()) throw InvalidInput("cannot render an empty signal");
  std::size_t max_ir = 0;
  for (const auto &ir : irs) {
    ir.Validate();
    max_ir = std::max(max_ir, ir.taps.size());
  }
  MultichannelWaveform out;
  out.sample_rate = sample_rate;
  for (const auto &ir : irs) {
    Signal y = Convolve(s, ir.taps);
    Fit(y, s.size() + max_ir - 1);
    out.channels.push_back(std::move(y));
  }
  return out;
}

double SnrScaleFactor(std::span<const double> signal,
                      std::span<const double> noise, double target_snr_db) {
  const double ps = MeanPower(signal), pn = MeanPower(noise);
  if (!(ps > 0.0)) throw InvalidInput("SNR reference signal is silent");
  if (!(pn > 0.0)) throw InvalidInput("noise is silent");
  return std::sqrt(ps / (pn * std::pow(10.0, target_snr_db / 10.0)));
}

Signal SnrScale(std::span<const double> signal, std::span<const double> noise,
                double target_snr_db) {
  const double g = SnrScaleFactor(signal, noise, target_snr_db);
  Signal out(noise.begin(), noise.end());
  for (auto &v : out) v *= g;
  return out;
}

Scene MixScene(const SceneManifest &m) {
  m.Validate();
  const std::size_t z = m.zones;
  Scene scene;
  scene.images.resize(z);
  std::size_t n = 0;
  for (const auto &sp : m.speakers) {
    Signal s = sp.speech;
    for (auto &v : s) v *= sp.gain;
    scene.images[sp.zone] = RenderReverberant(s, sp.irs, z, m.sample_rate);
    n = std::max(n, scene.images[sp.zone]->NumSamples());
  }
  if (m.length) n = *m.length;
  for (auto &img : scene.images)
    if (img)
      for (auto &ch : img->channels) Fit(ch, n);

  Signal reference(n, 0.0);
  for (const auto &img : scene.images)
    if (img)
      for (std::size_t i = 0; i < n; ++i) reference[i] += img->channels[0][i];

  scene.noise = MultichannelWaveform(z, n, m.sample_rate);
  if (m.background) {
    auto bg = RenderNoise(*m.background, z, n, true, m.sample_rate);
    const double g = SnrScaleFactor(reference, bg.channels[0], m.background->snr_db);
    for (std::size_t c = 0; c < z; ++c)
      for (std::size_t i = 0; i < n; ++i) scene.noise.channels[c][i] += g * bg.channels[c][i];
  }
  for (const auto &t : m.transients) {
    if (t.onset >= n) throw InvalidManifest("transient onset beyond the scene");
    const std::size_t span = std::min(t.samples.NumSamples(), n - t.onset);
    auto ev = RenderNoise(t, z, span, false, m.sample_rate);
    const double g = SnrScaleFactor(
        std::span<const double>(reference).subspan(t.onset, span), ev.channels[0],
        t.snr_db);
    for (std::size_t c = 0; c < z; ++c)
      for (std::size_t i = 0; i < span; ++i)
        scene.noise.channels[c][t.onset + i] += g * ev.channels[c][i];
  }

  scene.speech_labels = MultichannelWaveform(z, n, m.sample_rate);
  scene.mixture = MultichannelWaveform(z, n, m.sample_rate);
  for (std::size_t zone = 0; zone < z; ++zone)
    if (scene.images[zone]) scene.speech_labels.channels[zone] = scene.images[zone]->channels[zone];
  for (std::size_t c = 0; c < z; ++c) {
    auto &y = scene.mixture.channels[c];
    for (const auto &img : scene.images)
      if (img)
        for (std::size_t i = 0; i < n; ++i) y[i] += img->channels[c][i];
    for (std::size_t i = 0; i < n; ++i) y[i] += scene.noise.channels[c][i];
  }
  return scene;
}

MaskPair OracleMasks(const Scene &scene, const StftConfig &cfg) {
  const std::size_t z = scene.mixture.NumChannels();
  const auto noise = Analyze(scene.noise, cfg);
  std::vector<std::optional<ComplexSpectrogram>> images(z);
  for (std::size_t j = 0; j < z; ++j)
    if (j < scene.images.size() && scene.images[j]) images[j] = Analyze(*scene.images[j], cfg);
  const std::size_t frames = noise.frames(), bins = noise.bins();
  MaskPair masks{Tensor3(z, frames, bins), Tensor3(z, frames, bins)};
  for (std::size_t i = 0; i < z; ++i)
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t f = 0; f < bins; ++f) {
        const double v = std::abs(noise.at(i, t, f));
        double total = v;
        for (const auto &img : images)
          if (img) total += std::abs(img->at(i, t, f));
        if (!(total > 0.0)) continue;
        const double own = images[i] ? std::abs(images[i]->at(i, t, f)) : 0.0;
        masks.speech.at(i, t, f) = static_cast<float>(std::min(1.0, own / total));
        masks.noise.at(i, t, f) = static_cast<float>(std::min(1.0, v / total));
      }
  return masks;
}

}  // namespace cabinsep
