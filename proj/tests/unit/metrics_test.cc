#include <cmath>
#include <numbers>
#include <thread>

#include <gtest/gtest.h>

#include "cabinsep/metrics/metrics.h"
#include "test_util.h"

namespace cabinsep {
namespace {

using testing::WhiteNoise;

TEST(SiSnrTest, ClampsAndScaleInvariance) {
  Rng rng(1);
  auto t = WhiteNoise(rng, 4000);
  EXPECT_EQ(SiSnr(t, t), 60.0);
  Signal scaled = t;
  for (auto &v : scaled) v *= 3.7;
  EXPECT_EQ(SiSnr(scaled, t), 60.0);

  auto noisy = t;
  auto n = WhiteNoise(rng, 4000, 0.2);
  for (std::size_t i = 0; i < t.size(); ++i) noisy[i] += n[i];
  const double base = SiSnr(noisy, t);
  for (double c : {-2.0, 0.01, 50.0}) {
    Signal e = noisy, tt = t;
    for (auto &v : e) v *= c;
    EXPECT_NEAR(SiSnr(e, t), base, 1e-9);
    for (auto &v : tt) v *= c;
    EXPECT_NEAR(SiSnr(noisy, tt), base, 1e-9);
  }
}

TEST(SiSnrTest, OrthogonalAndKnownValue) {
  Signal t = {1.0, 0.0, 0.0, 0.0}, o = {0.0, 1.0, 0.0, 0.0};
  EXPECT_EQ(SiSnr(o, t), -60.0);
  // Projection 1, residual 0.5 in an orthogonal direction: 10 log10(1/0.25).
  Signal e = {1.0, 0.5, 0.0, 0.0};
  EXPECT_NEAR(SiSnr(e, t), 10.0 * std::log10(4.0), 1e-12);
  EXPECT_THROW(SiSnr(t, Signal(4, 0.0)), InvalidInput);
  EXPECT_THROW(SiSnr(t, Signal(3, 1.0)), InvalidInput);
}

// Independent log-mel: direct DFT, explicit window, explicit triangles.
std::vector<std::vector<double>> ReferenceFbank(const Signal &x) {
  const std::size_t n_fft = 512, hop = 256, bands = 80;
  const double pi = std::numbers::pi;
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> centers(bands + 2);
  for (std::size_t i = 0; i < centers.size(); ++i)
    centers[i] = hz(mel(8000.0) * i / (bands + 1));
  const std::size_t frames = (x.size() + hop - 1) / hop;
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> seg(n_fft, 0.0);
    for (std::size_t i = 0; i < n_fft; ++i) {
      const std::size_t k = t * hop + i;
      const double w = 0.54 - 0.46 * std::cos(2.0 * pi * i / n_fft);
      if (k < x.size()) seg[i] = x[k] * w;
    }
    auto spec = testing::DirectDft(seg, n_fft);
    std::vector<double> row(bands);
    for (std::size_t m = 0; m < bands; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < spec.size(); ++k) {
        const double f = k * 16000.0 / n_fft;
        double weight = 0.0;
        if (f > centers[m] && f <= centers[m + 1])
          weight = (f - centers[m]) / (centers[m + 1] - centers[m]);
        else if (f > centers[m + 1] && f < centers[m + 2])
          weight = (centers[m + 2] - f) / (centers[m + 2] - centers[m + 1]);
        e += weight * std::norm(spec[k]);
      }
      row[m] = std::log(std::max(e, 1e-10));
    }
    out.push_back(row);
  }
  return out;
}

TEST(FbankTest, MatchesDirectComputation) {
  Rng rng(2);
  auto x = WhiteNoise(rng, 1200, 1.0);
  auto got = LogMelFbank(x);
  auto ref = ReferenceFbank(x);
  ASSERT_EQ(got.size(), ref.size());
  for (std::size_t t = 0; t < ref.size(); ++t)
    for (std::size_t m = 0; m < 80; ++m) ASSERT_NEAR(got[t][m], ref[t][m], 1e-8);
}

TEST(FbankTest, MaeAgainstSilence) {
  Rng rng(3);
  auto b = WhiteNoise(rng, 2000, 1.0);
  Signal a(2000, 0.0);
  auto ref = ReferenceFbank(b);
  double expected = 0.0;
  std::size_t count = 0;
  for (const auto &row : ref)
    for (double v : row) {
      expected += std::abs(std::log(1e-10) - v);
      ++count;
    }
  expected /= count;
  EXPECT_NEAR(FbankMae(a, b), expected, 1e-8);
  EXPECT_GT(FbankMae(a, b), 0.0);
}

TEST(FbankTest, IdentitySymmetryNonNegativity) {
  Rng rng(4);
  auto a = WhiteNoise(rng, 3000), b = WhiteNoise(rng, 3000);
  EXPECT_EQ(FbankMae(a, a), 0.0);
  EXPECT_EQ(FbankMae(a, b), FbankMae(b, a));
  EXPECT_GT(FbankMae(a, b), 0.0);
}

MultichannelWaveform Random(Rng &rng, std::size_t ch, std::size_t n) {
  MultichannelWaveform w(ch, n);
  for (auto &c : w.channels) c = WhiteNoise(rng, n);
  return w;
}

TEST(CombinedLossTest, IdealAndComponentwise) {
  Rng rng(5);
  auto s = Random(rng, 2, 2000), n = Random(rng, 2, 2000);
  auto ideal = CombinedLoss(s, s, n, n);
  EXPECT_EQ(ideal.total, -60.0);

  auto s_est = Random(rng, 2, 2000), n_est = Random(rng, 2, 2000);
  auto terms = CombinedLoss(s_est, s, n_est, n);
  const double fs = 0.5 * (FbankMae(s_est.channels[0], s.channels[0]) +
                           FbankMae(s_est.channels[1], s.channels[1]));
  const double fn = 0.5 * (FbankMae(n_est.channels[0], n.channels[0]) +
                           FbankMae(n_est.channels[1], n.channels[1]));
  const double snr = 0.5 * (SiSnr(s_est.channels[0], s.channels[0]) +
                            SiSnr(s_est.channels[1], s.channels[1]));
  EXPECT_NEAR(terms.total, 0.01 * fs - snr + 0.01 * fn, 1e-9);

  LossWeights speech_only;
  speech_only.gamma = 0.0;
  EXPECT_NEAR(CombinedLoss(s_est, s, n_est, n, speech_only).total, 0.01 * fs - snr, 1e-9);
  LossWeights bad;
  bad.alpha = -1.0;
  EXPECT_THROW(CombinedLoss(s, s, n, n, bad), InvalidConfig);
}

TEST(CombinedLossTest, DecreasesAsSiSnrImproves) {
  Rng rng(6);
  auto s = Random(rng, 1, 3000), n = Random(rng, 1, 3000);
  auto noise = Random(rng, 1, 3000);
  LossWeights w;
  w.alpha = 0.0;
  w.gamma = 0.0;
  double previous = 1e9;
  for (double level : {1.0, 0.5, 0.1, 0.01}) {
    auto est = s;
    for (std::size_t i = 0; i < 3000; ++i) est.channels[0][i] += level * noise.channels[0][i];
    const double loss = CombinedLoss(est, s, n, n, w).total;
    EXPECT_LT(loss, previous);
    previous = loss;
  }
}

TEST(PositioningTest, ArgmaxTieAndUndecided) {
  Rng rng(7);
  std::vector<Signal> out(4, Signal(100, 0.0));
  out[1] = WhiteNoise(rng, 100);
  auto e = ZonePositioning(out, 1);
  EXPECT_EQ(e.predicted.value(), 1u);
  EXPECT_TRUE(e.correct());

  std::vector<Signal> tie(4, Signal(100, 0.0));
  tie[2] = WhiteNoise(rng, 100);
  tie[3] = tie[2];
  EXPECT_EQ(ZonePositioning(tie, 0).predicted.value(), 2u);

  std::vector<Signal> silent(4, Signal(100, 0.0));
  EXPECT_FALSE(ZonePositioning(silent, 0).predicted.has_value());
}

TEST(PositioningTest, GainInvariance) {
  Rng rng(8);
  std::vector<Signal> out;
  for (int z = 0; z < 4; ++z) out.push_back(WhiteNoise(rng, 500, 0.1 + 0.1 * z));
  const auto base = ZonePositioning(out, 0).predicted;
  for (double g : {1e-4, 7.0}) {
    auto scaled = out;
    for (auto &s : scaled)
      for (auto &v : s) v *= g;
    EXPECT_EQ(ZonePositioning(scaled, 0).predicted, base);
  }
}

TEST(PositioningTest, Summary) {
  std::vector<PositioningEntry> entries = {
      {0, 0, false}, {1, 2, false}, {2, std::nullopt, false}, {0, 0, true}, {1, 0, true}};
  auto r = Summarize(entries);
  EXPECT_EQ(r.decided, 4u);
  EXPECT_EQ(r.undecided, 1u);
  EXPECT_DOUBLE_EQ(r.accuracy(), 0.5);
  EXPECT_DOUBLE_EQ(r.nspa().value(), 0.5);
  EXPECT_FALSE(Summarize({{0, 0, false}}).nspa().has_value());
}

TEST(RtfTest, MedianOfRuns) {
  int calls = 0;
  auto r = MeasureRtf([&] {
    ++calls;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }, 0.1, 5);
  EXPECT_EQ(calls, 6);
  EXPECT_EQ(r.runs.size(), 5u);
  EXPECT_GT(r.median, 0.0);
  EXPECT_LE(r.min, r.median);
  EXPECT_GE(r.max, r.median);
}

}  // namespace
}  // namespace cabinsep
