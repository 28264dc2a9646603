#include <cmath>

#include <gtest/gtest.h>

#include "cabinsep/common.h"
#include "cabinsep/mvdr/mvdr.h"

namespace cabinsep {
namespace {

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

std::vector<Complex> ToStd(const Eigen::VectorXcd &v) {
  return {v.data(), v.data() + v.size()};
}

double MaxAsymmetry(const Eigen::MatrixXcd &a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

TEST(MvdrWeightsTest, SingleZoneIsPassthrough) {
  Eigen::MatrixXcd phi(1, 1), psi(1, 1);
  phi(0, 0) = 3.7;
  psi(0, 0) = 0.2;
  auto r = ComputeMvdrWeights(phi, psi, 0, 1e-4);
  EXPECT_NEAR(std::abs(r.w[0] - Complex(1.0)), 0.0, 1e-12);
}

TEST(MvdrWeightsTest, IdentityNoiseClosedForm) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = RandomVector(rng, 4);
    d.normalize();
    const Eigen::MatrixXcd phi = d * d.adjoint();
    const Eigen::MatrixXcd psi = Eigen::MatrixXcd::Identity(4, 4);
    for (std::size_t ref = 0; ref < 4; ++ref) {
      auto r = ComputeMvdrWeights(phi, psi, ref, 1e-4);
      const Eigen::VectorXcd expected = d * std::conj(d[ref]) / d.squaredNorm();
      EXPECT_LT((r.w - expected).norm(), 1e-10);
      EXPECT_LT(std::abs(r.w.dot(d) - d[ref]), 1e-10);
    }
  }
}

TEST(MvdrWeightsTest, DistortionlessForAnyNoise) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto d = RandomVector(rng, 4);
    const double sigma2 = std::exp(Uniform(rng, -3.0, 3.0));
    const Eigen::MatrixXcd phi = sigma2 * d * d.adjoint();
    const auto psi = RandomSpd(rng, 4);
    const std::size_t ref = UniformIndex(rng, 4);
    auto r = ComputeMvdrWeights(phi, psi, ref, 1e-4);
    ASSERT_FALSE(r.passthrough);
    // W^H d, with Eigen's dot conjugating its first argument.
    EXPECT_LT(std::abs(r.w.dot(d) - d[ref]), 1e-6 * std::abs(d[ref]));
  }
}

TEST(MvdrWeightsTest, TraceNormalizationInvariance) {
  Rng rng(3);
  const auto phi = RandomSpd(rng, 4);
  const auto psi = RandomSpd(rng, 4);
  auto base = ComputeMvdrWeights(phi, psi, 2, 1e-4);
  for (double c : {1e-3, 1.0, 1e3}) {
    auto r = ComputeMvdrWeights(c * phi, psi, 2, 1e-4);
    EXPECT_LT((r.w - base.w).norm(), 1e-9 * base.w.norm());
  }
}

TEST(MvdrWeightsTest, ZeroPhiFallsBack) {
  Rng rng(4);
  auto r = ComputeMvdrWeights(Eigen::MatrixXcd::Zero(3, 3), RandomSpd(rng, 3), 1, 1e-4);
  EXPECT_TRUE(r.passthrough);
  EXPECT_FALSE(r.numerical_error);
  EXPECT_EQ(r.w, Eigen::VectorXcd::Unit(3, 1));
}

TEST(MvdrWeightsTest, SingularNoiseFallsBackWithError) {
  Rng rng(5);
  auto r = ComputeMvdrWeights(RandomSpd(rng, 3), Eigen::MatrixXcd::Zero(3, 3), 0, 1e-4);
  EXPECT_TRUE(r.passthrough);
  EXPECT_TRUE(r.numerical_error);
  EXPECT_EQ(r.w, Eigen::VectorXcd::Unit(3, 0));
}

TEST(MvdrWeightsTest, LoadedInverseIsAccurate) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto v = RandomVector(rng, 4);
    // Rank one: only the loading makes it invertible.
    const Eigen::MatrixXcd psi = v * v.adjoint();
    Eigen::MatrixXcd loaded = psi;
    loaded.diagonal().array() += 1e-4 * psi.trace().real() / 4.0;
    Eigen::LLT<Eigen::MatrixXcd> llt(loaded);
    ASSERT_EQ(llt.info(), Eigen::Success);
    const Eigen::MatrixXcd inv = llt.solve(Eigen::MatrixXcd::Identity(4, 4));
    EXPECT_LT((loaded * inv - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ApplyTest, BruteForce) {
  Rng rng(7);
  auto w = RandomVector(rng, 4), y = RandomVector(rng, 4);
  Complex expected = 0.0;
  for (int i = 0; i < 4; ++i)
    expected += Complex(w[i].real(), -w[i].imag()) * y[i];
  EXPECT_LT(std::abs(ApplyWeights(ToStd(w), ToStd(y)) - expected), 1e-12);
  auto e = Eigen::VectorXcd::Unit(4, 2).eval();
  EXPECT_EQ(ApplyWeights(ToStd(e), ToStd(y)), y[2]);
  EXPECT_EQ(ApplyWeights(ToStd(w), std::vector<Complex>(4)), Complex(0.0));
}

TEST(BeamformerTest, CumulativeSumAndUntouchedInterference) {
  Rng rng(8);
  const std::size_t z = 3, f = 2;
  StreamingBeamformer bf(z, f);
  std::vector<float> speech(z * f, 0.0f), noise(z * f, 0.0f);
  for (std::size_t b = 0; b < f; ++b) speech[0 * f + b] = 1.0f;
  std::vector<Eigen::MatrixXcd> expected(f, Eigen::MatrixXcd::Zero(z, z));
  for (int t = 0; t < 10; ++t) {
    std::vector<Complex> snap(z * f);
    for (auto &v : snap) v = {Gaussian(rng), Gaussian(rng)};
    bf.Update(snap, speech, noise);
    for (std::size_t b = 0; b < f; ++b) {
      Eigen::VectorXcd y(z);
      for (std::size_t m = 0; m < z; ++m) y[m] = snap[m * f + b];
      expected[b] += y * y.adjoint();
    }
  }
  for (std::size_t b = 0; b < f; ++b) {
    EXPECT_LT((bf.phi(0, b) - expected[b]).norm(), 1e-9 * expected[b].norm());
    EXPECT_EQ(bf.psi(0, b), Eigen::MatrixXcd::Zero(z, z));
    // Zone 0's speech is interference for the other zones.
    EXPECT_LT((bf.psi(1, b) - expected[b]).norm(), 1e-9 * expected[b].norm());
  }
  EXPECT_EQ(bf.frame_count(), 10u);
}

TEST(BeamformerTest, GeometricConvergence) {
  const std::size_t z = 2, f = 1;
  MvdrConfig cfg;
  cfg.forgetting = 0.9;
  StreamingBeamformer bf(z, f, cfg);
  std::vector<Complex> snap = {Complex(0.3, -0.4), Complex(1.1, 0.2)};
  std::vector<float> speech = {1.0f, 0.0f}, noise = {0.0f, 0.0f};
  for (int t = 0; t < 200; ++t) bf.Update(snap, speech, noise);
  Eigen::VectorXcd x(2);
  x << snap[0], snap[1];
  const Eigen::MatrixXcd limit = x * x.adjoint() / (1.0 - 0.9);
  EXPECT_LT((bf.phi(0, 0) - limit).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(BeamformerTest, HermitianAndPsd) {
  Rng rng(9);
  const std::size_t z = 4, f = 5;
  MvdrConfig cfg;
  cfg.forgetting = 0.97;
  StreamingBeamformer bf(z, f, cfg);
  for (int t = 0; t < 40; ++t) {
    std::vector<Complex> snap(z * f);
    std::vector<float> speech(z * f), noise(z * f);
    for (auto &v : snap) v = {Gaussian(rng), Gaussian(rng)};
    for (auto &v : speech) v = static_cast<float>(UniformUnit(rng));
    for (auto &v : noise) v = static_cast<float>(UniformUnit(rng));
    bf.Update(snap, speech, noise);
    for (std::size_t i = 0; i < z; ++i)
      for (std::size_t b = 0; b < f; ++b)
        for (const auto *m : {&bf.phi(i, b), &bf.psi(i, b)}) {
          ASSERT_LT(MaxAsymmetry(*m), 1e-6);
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(*m);
          ASSERT_GE(es.eigenvalues().minCoeff(), -1e-8);
        }
  }
}

TEST(BeamformerTest, RejectsBadMasksWithoutChangingState) {
  StreamingBeamformer bf(2, 1);
  std::vector<Complex> snap = {1.0, 2.0};
  std::vector<float> ok = {0.5f, 0.5f}, bad = {1.5f, 0.0f};
  EXPECT_THROW(bf.Update(snap, bad, ok), InvalidInput);
  EXPECT_THROW(bf.Update(snap, ok, bad), InvalidInput);
  std::vector<float> nan = {std::nanf(""), 0.0f};
  EXPECT_THROW(bf.Update(snap, nan, ok), InvalidInput);
  EXPECT_EQ(bf.frame_count(), 0u);
  EXPECT_EQ(bf.phi(0, 0), Eigen::MatrixXcd::Zero(2, 2));
}

ComplexSpectrogram RandomSpec(Rng &rng, std::size_t z, std::size_t t,
                              std::size_t f) {
  ComplexSpectrogram y(z, t, f);
  for (auto &v : y.data()) v = {Gaussian(rng), Gaussian(rng)};
  return y;
}

MaskPair RandomMasks(Rng &rng, std::size_t z, std::size_t t, std::size_t f) {
  MaskPair m{Tensor3(z, t, f), Tensor3(z, t, f)};
  for (auto &v : m.speech.data()) v = static_cast<float>(UniformUnit(rng));
  for (auto &v : m.noise.data()) v = static_cast<float>(UniformUnit(rng));
  return m;
}

TEST(SeparateStreamTest, SingleZoneIsIdentity) {
  Rng rng(10);
  auto y = RandomSpec(rng, 1, 12, 7);
  auto masks = RandomMasks(rng, 1, 12, 7);
  auto out = SeparateStream(y, masks);
  for (std::size_t i = 0; i < y.data().size(); ++i)
    EXPECT_LT(std::abs(out.data()[i] - y.data()[i]), 1e-12);
}

TEST(SeparateStreamTest, ZeroSpeechMasksPassThrough) {
  Rng rng(11);
  auto y = RandomSpec(rng, 4, 9, 5);
  auto masks = RandomMasks(rng, 4, 9, 5);
  for (auto &v : masks.speech.data()) v = 0.0f;
  MvdrStats stats;
  auto out = SeparateStream(y, masks, {}, &stats);
  EXPECT_EQ(out.data(), y.data());
  EXPECT_EQ(stats.passthroughs, 4u * 9u * 5u);
}

TEST(SeparateStreamTest, PrefixCausality) {
  Rng rng(12);
  auto y = RandomSpec(rng, 3, 20, 6);
  auto masks = RandomMasks(rng, 3, 20, 6);
  auto full = SeparateStream(y, masks);
  for (std::size_t t : {1u, 7u, 13u}) {
    MaskPair m{Tensor3(3, t, 6), Tensor3(3, t, 6)};
    std::copy(masks.speech.data().begin(),
              masks.speech.data().begin() + t * 18, m.speech.data().begin());
    std::copy(masks.noise.data().begin(),
              masks.noise.data().begin() + t * 18, m.noise.data().begin());
    auto part = SeparateStream(y.Prefix(t), m);
    for (std::size_t z = 0; z < 3; ++z)
      for (std::size_t k = 0; k < t; ++k)
        for (std::size_t f = 0; f < 6; ++f)
          ASSERT_EQ(part.at(z, k, f), full.at(z, k, f));
  }
}

TEST(SeparateStreamTest, RecomputeCadenceHoldsWeights) {
  Rng rng(13);
  const std::size_t z = 2, f = 3;
  MvdrConfig cfg;
  cfg.recompute_every = 4;
  StreamingBeamformer bf(z, f, cfg);
  std::vector<Complex> out(z * f);
  Eigen::VectorXcd held;
  for (int t = 0; t < 8; ++t) {
    std::vector<Complex> snap(z * f);
    std::vector<float> speech(z * f), noise(z * f);
    for (auto &v : snap) v = {Gaussian(rng), Gaussian(rng)};
    for (auto &v : speech) v = static_cast<float>(UniformUnit(rng));
    for (auto &v : noise) v = static_cast<float>(UniformUnit(rng));
    bf.Process(snap, speech, noise, out);
    if (t % 4 == 0) {
      held = bf.weights(0, 1);
    } else {
      EXPECT_EQ(bf.weights(0, 1), held);
    }
  }
}

TEST(SeparateStreamTest, ShapeMismatchThrows) {
  Rng rng(14);
  auto y = RandomSpec(rng, 2, 5, 3);
  auto masks = RandomMasks(rng, 2, 4, 3);
  EXPECT_THROW(SeparateStream(y, masks), InvalidInput);
}

TEST(MvdrConfigTest, Validation) {
  MvdrConfig cfg;
  cfg.forgetting = 0.0;
  EXPECT_THROW(cfg.Validate(), InvalidConfig);
  cfg.forgetting = 1.0;
  cfg.loading = -1.0;
  EXPECT_THROW(cfg.Validate(), InvalidConfig);
  cfg.loading = 0.0;
  cfg.recompute_every = 0;
  EXPECT_THROW(cfg.Validate(), InvalidConfig);
}

}  // namespace
}  // namespace cabinsep
