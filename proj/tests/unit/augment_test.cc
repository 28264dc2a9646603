#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "cabinsep/augment/manifest.h"
#include "cabinsep/augment/scene.h"
#include "cabinsep/augment/synthetic.h"
#include "cabinsep/dsp/convolve.h"
#include "cabinsep/dsp/wav.h"
#include "test_util.h"

namespace cabinsep {
namespace {

using testing::WhiteNoise;

ImpulseResponse Delta(std::size_t delay, std::size_t length) {
  ImpulseResponse ir;
  ir.taps.assign(length, 0.0);
  ir.taps[delay] = 1.0;
  return ir;
}

std::vector<ImpulseResponse> RandomIrs(Rng &rng, std::size_t zones) {
  std::vector<ImpulseResponse> irs;
  for (std::size_t m = 0; m < zones; ++m) {
    ImpulseResponse ir;
    ir.taps = testing::DecayingNoise(rng, 40 + 10 * m, 8.0);
    irs.push_back(ir);
  }
  return irs;
}

double PowerDb(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return 10.0 * std::log10(e / static_cast<double>(x.size()));
}

SpeakerEntry Speaker(Rng &rng, std::size_t zone, std::size_t zones) {
  SpeakerEntry s;
  s.zone = zone;
  s.speech = WhiteNoise(rng, 4000);
  s.irs = RandomIrs(rng, zones);
  return s;
}

TEST(RenderTest, UnitImpulsesCopyTheSource) {
  Rng rng(1);
  auto s = WhiteNoise(rng, 500);
  std::vector<ImpulseResponse> irs(4, Delta(0, 1));
  auto out = RenderReverberant(s, irs, 4);
  for (const auto &ch : out.channels) EXPECT_EQ(ch, s);
}

TEST(RenderTest, DelaysAndCommonLength) {
  Rng rng(2);
  auto s = WhiteNoise(rng, 300);
  std::vector<ImpulseResponse> irs = {Delta(0, 5), Delta(3, 5), Delta(7, 10), Delta(1, 2)};
  auto out = RenderReverberant(s, irs, 4);
  const std::size_t delays[] = {0, 3, 7, 1};
  for (std::size_t m = 0; m < 4; ++m) {
    ASSERT_EQ(out.channels[m].size(), 300u + 10u - 1u);
    for (std::size_t i = 0; i < out.channels[m].size(); ++i) {
      const double expected = i >= delays[m] && i - delays[m] < 300 ? s[i - delays[m]] : 0.0;
      EXPECT_EQ(out.channels[m][i], expected);
    }
  }
}

TEST(RenderTest, MatchesDirectConvolution) {
  Rng rng(3);
  auto s = WhiteNoise(rng, 700);
  auto irs = RandomIrs(rng, 3);
  auto out = RenderReverberant(s, irs, 3);
  for (std::size_t m = 0; m < 3; ++m) {
    auto ref = testing::DirectConvolution(s, irs[m].taps);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(out.channels[m][i], ref[i], 1e-10);
  }
  EXPECT_THROW(RenderReverberant(s, irs, 4), InvalidInput);
}

TEST(SnrScaleTest, Basics) {
  Rng rng(4);
  auto a = WhiteNoise(rng, 10000);
  auto b = a;
  std::reverse(b.begin(), b.end());
  EXPECT_NEAR(SnrScaleFactor(a, b, 0.0), 1.0, 1e-12);
  const double g0 = SnrScaleFactor(a, b, 0.0), g20 = SnrScaleFactor(a, b, 20.0);
  EXPECT_NEAR(g20 * g20 / (g0 * g0), 1e-2, 1e-14);
  EXPECT_THROW(SnrScale(Signal(10, 0.0), b, 0.0), InvalidInput);
  EXPECT_THROW(SnrScale(a, Signal(10, 0.0), 0.0), InvalidInput);
}

TEST(SnrScaleTest, ReMeasuredSnrMatchesTarget) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = WhiteNoise(rng, 3000, Uniform(rng, 0.01, 2.0));
    auto n = WhiteNoise(rng, 3000, Uniform(rng, 0.01, 2.0));
    const double target = Uniform(rng, -20.0, 25.0);
    auto scaled = SnrScale(s, n, target);
    EXPECT_NEAR(PowerDb(s) - PowerDb(scaled), target, 1e-3);
  }
}

TEST(MixSceneTest, SingleSpeakerNoNoise) {
  Rng rng(6);
  SceneManifest m;
  m.speakers.push_back(Speaker(rng, 2, 4));
  auto scene = MixScene(m);
  auto image = RenderReverberant(m.speakers[0].speech, m.speakers[0].irs, 4);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(scene.mixture.channels[c], image.channels[c]);
  EXPECT_EQ(scene.speech_labels.channels[2], scene.mixture.channels[2]);
  for (double v : scene.speech_labels.channels[0]) EXPECT_EQ(v, 0.0);
}

TEST(MixSceneTest, TwoSpeakersAddExactly) {
  Rng rng(7);
  SceneManifest m;
  m.speakers.push_back(Speaker(rng, 0, 4));
  m.speakers.push_back(Speaker(rng, 2, 4));
  auto scene = MixScene(m);
  auto a = RenderReverberant(m.speakers[0].speech, m.speakers[0].irs, 4);
  auto b = RenderReverberant(m.speakers[1].speech, m.speakers[1].irs, 4);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < scene.mixture.NumSamples(); ++i) {
      const double va = i < a.NumSamples() ? a.channels[c][i] : 0.0;
      const double vb = i < b.NumSamples() ? b.channels[c][i] : 0.0;
      ASSERT_EQ(scene.mixture.channels[c][i], va + vb);
    }
}

SceneManifest NoisyManifest(Rng &rng, double bg_snr) {
  SceneManifest m;
  m.speakers.push_back(Speaker(rng, 0, 4));
  m.speakers.push_back(Speaker(rng, 3, 4));
  NoiseEntry bg;
  bg.samples = MultichannelWaveform(4, 1500);
  for (auto &ch : bg.samples.channels) ch = WhiteNoise(rng, 1500);
  bg.snr_db = bg_snr;
  m.background = bg;
  NoiseEntry t;
  t.samples = MultichannelWaveform::Mono(WhiteNoise(rng, 800));
  t.irs = RandomIrs(rng, 4);
  t.onset = 1000;
  t.snr_db = 2.0;
  m.transients.push_back(t);
  return m;
}

TEST(MixSceneTest, AdditivityAndSnr) {
  Rng rng(8);
  for (double snr : {0.0, -20.0, 7.5, 25.0}) {
    auto m = NoisyManifest(rng, snr);
    m.transients.clear();
    auto scene = MixScene(m);
    const std::size_t n = scene.mixture.NumSamples();
    Signal speech0(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto &img : scene.images)
        if (img) speech0[i] += img->channels[0][i];
    EXPECT_NEAR(PowerDb(speech0) - PowerDb(scene.noise.channels[0]), snr, 1e-3);
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < n; ++i) {
        double r = scene.mixture.channels[c][i] - scene.noise.channels[c][i];
        for (const auto &img : scene.images)
          if (img) r -= img->channels[c][i];
        ASSERT_LT(std::abs(r), 1e-6);
      }
  }
}

TEST(MixSceneTest, TransientSnrOverItsSpan) {
  Rng rng(9);
  auto m = NoisyManifest(rng, 10.0);
  auto no_transient = m;
  no_transient.transients.clear();
  auto scene = MixScene(m);
  auto base = MixScene(no_transient);
  const std::size_t onset = 1000, len = 800;
  Signal speech0(len, 0.0), event0(len);
  for (std::size_t i = 0; i < len; ++i) {
    for (const auto &img : scene.images)
      if (img) speech0[i] += img->channels[0][onset + i];
    event0[i] = scene.noise.channels[0][onset + i] - base.noise.channels[0][onset + i];
  }
  EXPECT_NEAR(PowerDb(speech0) - PowerDb(event0), 2.0, 1e-3);
  for (std::size_t i = 0; i < onset; ++i)
    ASSERT_EQ(scene.noise.channels[1][i], base.noise.channels[1][i]);
}

TEST(MixSceneTest, Deterministic) {
  Rng a(10), b(10);
  auto sa = MixScene(NoisyManifest(a, 3.0));
  auto sb = MixScene(NoisyManifest(b, 3.0));
  EXPECT_EQ(sa.mixture.channels, sb.mixture.channels);
}

TEST(MixSceneTest, ManifestValidation) {
  Rng rng(11);
  SceneManifest m;
  EXPECT_THROW(MixScene(m), InvalidManifest);  // no speakers
  m.speakers.push_back(Speaker(rng, 1, 4));
  m.speakers.push_back(Speaker(rng, 1, 4));
  EXPECT_THROW(MixScene(m), InvalidManifest);  // zone collision
  m.speakers.pop_back();
  m.speakers[0].irs.pop_back();
  EXPECT_THROW(MixScene(m), InvalidManifest);
  auto noisy = NoisyManifest(rng, 30.0);
  EXPECT_THROW(MixScene(noisy), InvalidManifest);
  noisy.training_snr_ranges = false;
  EXPECT_NO_THROW(MixScene(noisy));
  noisy = NoisyManifest(rng, 0.0);
  noisy.transients[0].snr_db = 6.0;
  EXPECT_THROW(MixScene(noisy), InvalidManifest);
}

TEST(OracleMasksTest, RangeAndSilentZones) {
  Rng rng(12);
  auto m = NoisyManifest(rng, 5.0);
  auto scene = MixScene(m);
  auto masks = OracleMasks(scene);
  EXPECT_EQ(masks.speech.channels(), 4u);
  EXPECT_EQ(masks.speech.bins(), 257u);
  for (std::size_t t = 0; t < masks.speech.frames(); ++t)
    for (std::size_t f = 0; f < 257; ++f) {
      EXPECT_EQ(masks.speech.at(1, t, f), 0.0f);
      EXPECT_EQ(masks.speech.at(2, t, f), 0.0f);
      for (std::size_t i = 0; i < 4; ++i) {
        const float s = masks.speech.at(i, t, f), n = masks.noise.at(i, t, f);
        ASSERT_GE(s, 0.0f);
        ASSERT_GE(n, 0.0f);
        ASSERT_LE(s + n, 1.0f + 1e-6f);
      }
    }
}

TEST(SyntheticTest, SignalsAreSeededAndScaled) {
  Rng a(1), b(1);
  auto x = SyntheticSpeech(a, 1.0);
  auto y = SyntheticSpeech(b, 1.0);
  EXPECT_EQ(x, y);
  EXPECT_EQ(x.size(), 16000u);
  EXPECT_NEAR(PowerDb(x), 20.0 * std::log10(0.05), 1e-9);
  auto noise = CabinNoise(a, 0.5);
  EXPECT_EQ(noise.NumChannels(), 4u);
  EXPECT_EQ(noise.NumSamples(), 8000u);
  EXPECT_GT(TransientBurst(a).size(), 3000u);
}

TEST(SamplerTest, RespectsTrainingRanges) {
  Rng rng(13);
  SamplerConfig cfg;
  cfg.seconds = 0.5;
  cfg.transient_probability = 0.5;
  for (int i = 0; i < 30; ++i) {
    auto m = SampleScene(rng, cfg);
    ASSERT_GE(m.speakers.size(), 1u);
    ASSERT_LE(m.speakers.size(), 4u);
    ASSERT_GE(m.background->snr_db, -20.0);
    ASSERT_LE(m.background->snr_db, 25.0);
    for (const auto &t : m.transients) {
      ASSERT_GE(t.snr_db, -5.0);
      ASSERT_LE(t.snr_db, 5.0);
    }
    EXPECT_NO_THROW(MixScene(m));
  }
  cfg.background_snr = {-30.0, 0.0};
  EXPECT_THROW(SampleScene(rng, cfg), InvalidConfig);
}

TEST(SamplerTest, DeterministicForSeed) {
  SamplerConfig cfg;
  cfg.seconds = 0.4;
  Rng a(99), b(99);
  auto sa = MixScene(SampleScene(a, cfg));
  auto sb = MixScene(SampleScene(b, cfg));
  EXPECT_EQ(sa.mixture.channels, sb.mixture.channels);
}

TEST(ManifestTest, ParseResolvesFilesAndZones) {
  const auto dir = std::filesystem::temp_directory_path() / "cabinsep_manifest_test";
  std::filesystem::create_directories(dir);
  Rng rng(14);
  WriteWav((dir / "a.wav").string(), MultichannelWaveform::Mono(WhiteNoise(rng, 4000, 0.3)));
  WriteWav((dir / "n.wav").string(), MultichannelWaveform::Mono(WhiteNoise(rng, 4000, 0.3)));
  const std::string text = R"({
    "zones": 4, "seed": 5,
    "speakers": [{"zone": 3, "speech": "a.wav", "ism": {"source": [2.05, 0.35, 0.85], "order": 3}}],
    "background": {"file": "n.wav", "snr_db": 5, "ism": {"source": [0.3, 0.75, 0.35], "order": 2}}
  })";
  {
    std::ofstream os(dir / "scene.json");
    os << text;
  }
  auto m = LoadManifest((dir / "scene.json").string());
  ASSERT_EQ(m.speakers.size(), 1u);
  EXPECT_EQ(m.speakers[0].zone, 2u);
  EXPECT_EQ(m.speakers[0].irs.size(), 4u);
  EXPECT_EQ(m.seed, 5u);
  auto scene = MixScene(m);
  EXPECT_EQ(scene.mixture.NumChannels(), 4u);

  auto formatted = FormatManifest(m);
  EXPECT_NE(formatted.find("\"zone\": 3"), std::string::npos);

  EXPECT_THROW(ParseManifest("{not json", dir.string()), InvalidManifest);
  EXPECT_THROW(ParseManifest(R"({"speakers": [{"zone": 5, "speech": "a.wav"}]})", dir.string()),
               InvalidManifest);
  EXPECT_THROW(ParseManifest(R"({"speakers": [{"zone": 1, "speech": "missing.wav"}]})", dir.string()),
               InvalidInput);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace cabinsep
