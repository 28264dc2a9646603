#include "cabinsep/mvdr/mvdr.h"

#include <algorithm>
#include <cmath>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

constexpr double kTraceFloor = 1e-10;

void CheckMasks(std::span<const float> m, std::size_t n, const char *what) {
  if (m.size() != n) throw InvalidInput(std::string(what) + " mask has the wrong size");
  for (float v : m)
    if (!(v >= 0.0f && v <= 1.0f))
      throw InvalidInput(std::string(what) + " mask value outside [0, 1]");
}

}  // namespace

void MvdrConfig::Validate() const {
  if (!(forgetting > 0.0 && forgetting <= 1.0))
    throw InvalidConfig("forgetting factor must lie in (0, 1]");
  if (!(loading >= 0.0)) throw InvalidConfig("diagonal loading must be >= 0");
  if (recompute_every == 0) throw InvalidConfig("recompute_every must be >= 1");
}

MvdrWeights ComputeMvdrWeights(const Eigen::MatrixXcd &phi,
                               const Eigen::MatrixXcd &psi, std::size_t ref,
                               double loading) {
  const Eigen::Index z = phi.rows();
  MvdrWeights out;
  out.w = Eigen::VectorXcd::Unit(z, static_cast<Eigen::Index>(ref));
  const double load = loading * psi.trace().real() / static_cast<double>(z);
  Eigen::MatrixXcd loaded = psi;
  loaded.diagonal().array() += load;
  Eigen::LLT<Eigen::MatrixXcd> llt(loaded);
  if (llt.info() != Eigen::Success) {
    out.passthrough = true;
    out.numerical_error = true;
    return out;
  }
  const Eigen::MatrixXcd x = llt.solve(phi);
  const Complex tr = x.trace();
  if (std::abs(tr) < kTraceFloor || !std::isfinite(tr.real()) ||
      !std::isfinite(tr.imag())) {
    out.passthrough = true;
    return out;
  }
  out.w = x.col(static_cast<Eigen::Index>(ref)) / tr;
  return out;
}

Complex ApplyWeights(std::span<const Complex> w, std::span<const Complex> y) {
  if (w.size() != y.size()) throw InvalidInput("weight and snapshot sizes differ");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += std::conj(w[i]) * y[i];
  return acc;
}

StreamingBeamformer::StreamingBeamformer(std::size_t zones, std::size_t bins,
                                         const MvdrConfig &cfg)
    : zones_(zones), bins_(bins), cfg_(cfg) {
  cfg_.Validate();
  if (zones == 0 || bins == 0) throw InvalidInput("beamformer needs zones and bins");
  const auto zero = Eigen::MatrixXcd::Zero(zones, zones);
  phi_.assign(zones * bins, zero);
  psi_.assign(zones * bins, zero);
  weights_.resize(zones * bins);
  for (std::size_t i = 0; i < zones; ++i)
    for (std::size_t f = 0; f < bins; ++f)
      weights_[i * bins + f] = Eigen::VectorXcd::Unit(zones, i);
}

void StreamingBeamformer::Update(std::span<const Complex> snapshot,
                                 std::span<const float> speech,
                                 std::span<const float> noise) {
  const std::size_t n = zones_ * bins_;
  if (snapshot.size() != n) throw InvalidInput("snapshot has the wrong size");
  CheckMasks(speech, n, "speech");
  CheckMasks(noise, n, "noise");

  const double lambda = cfg_.forgetting;
  Eigen::VectorXcd y(zones_);
  for (std::size_t f = 0; f < bins_; ++f) {
    for (std::size_t m = 0; m < zones_; ++m) y[m] = snapshot[m * bins_ + f];
    const Eigen::MatrixXcd outer = y * y.adjoint();
    double speech_sum = 0.0;
    for (std::size_t j = 0; j < zones_; ++j) speech_sum += speech[j * bins_ + f];
    for (std::size_t i = 0; i < zones_; ++i) {
      const double ms = speech[i * bins_ + f];
      const double mi = std::clamp(speech_sum - ms + noise[i * bins_ + f], 0.0, 1.0);
      auto &phi = phi_[i * bins_ + f];
      auto &psi = psi_[i * bins_ + f];
      phi = lambda * phi + ms * outer;
      psi = lambda * psi + mi * outer;
      phi = 0.5 * (phi + phi.adjoint()).eval();
      psi = 0.5 * (psi + psi.adjoint()).eval();
    }
  }
  ++frames_;
}

void StreamingBeamformer::RefreshWeights() {
  for (std::size_t i = 0; i < zones_; ++i)
    for (std::size_t f = 0; f < bins_; ++f) {
      const std::size_t k = i * bins_ + f;
      auto r = ComputeMvdrWeights(phi_[k], psi_[k], i, cfg_.loading);
      weights_[k] = std::move(r.w);
      passthroughs_ += r.passthrough;
      numerical_errors_ += r.numerical_error;
    }
}

void StreamingBeamformer::Process(std::span<const Complex> snapshot,
                                  std::span<const float> speech,
                                  std::span<const float> noise,
                                  std::span<Complex> out) {
  if (out.size() != zones_ * bins_) throw InvalidInput("output has the wrong size");
  Update(snapshot, speech, noise);
  if ((frames_ - 1) % cfg_.recompute_every == 0) RefreshWeights();
  std::vector<Complex> y(zones_);
  for (std::size_t f = 0; f < bins_; ++f) {
    for (std::size_t m = 0; m < zones_; ++m) y[m] = snapshot[m * bins_ + f];
    for (std::size_t i = 0; i < zones_; ++i) {
      const auto &w = weights_[i * bins_ + f];
      out[i * bins_ + f] = ApplyWeights({w.data(), zones_}, y);
    }
  }
}

ComplexSpectrogram SeparateStream(const ComplexSpectrogram &y,
                                  const MaskPair &masks, const MvdrConfig &cfg,
                                  MvdrStats *stats) {
  const std::size_t z = y.channels(), frames = y.frames(), bins = y.bins();
  for (const auto *m : {&masks.speech, &masks.noise})
    if (m->channels() != z || m->frames() != frames || m->bins() != bins)
      throw InvalidInput("mask shape does not match the spectrogram");
  StreamingBeamformer bf(z, bins, cfg);
  ComplexSpectrogram out(z, frames, bins);
  std::vector<Complex> snap(z * bins), x(z * bins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < z; ++m) {
      auto src = y.Frame(m, t);
      std::copy(src.begin(), src.end(), snap.begin() + m * bins);
    }
    bf.Process(snap, masks.speech.Frame(t), masks.noise.Frame(t), x);
    for (std::size_t i = 0; i < z; ++i)
      std::copy(x.begin() + i * bins, x.begin() + (i + 1) * bins,
                out.Frame(i, t).begin());
  }
  if (stats) {
    stats->numerical_errors = bf.numerical_errors();
    stats->passthroughs = bf.passthrough_count();
  }
  return out;
}

}  // namespace cabinsep
