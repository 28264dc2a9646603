#ifndef CABINSEP_MVDR_MVDR_H_
#define CABINSEP_MVDR_MVDR_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cabinsep/dsp/waveform.h"
#include "cabinsep/tensor.h"

namespace cabinsep {

struct MvdrConfig {
  double forgetting = 1.0;  // lambda in (0, 1]
  double loading = 1e-4;    // delta, relative to tr(Psi) / Z
  std::size_t recompute_every = 1;

  // Throws InvalidConfig.
  void Validate() const;
};

struct MvdrWeights {
  Eigen::VectorXcd w;
  bool passthrough = false;
  bool numerical_error = false;  // loaded Psi was not positive definite
};

// W = inv(Psi~) Phi e_ref / tr(inv(Psi~) Phi), Psi~ = Psi + delta tr(Psi)/Z I.
// Falls back to e_ref when the trace vanishes or the Cholesky factorization
// of Psi~ fails.
MvdrWeights ComputeMvdrWeights(const Eigen::MatrixXcd &phi,
                               const Eigen::MatrixXcd &psi, std::size_t ref,
                               double loading);

// X = W^H y.
Complex ApplyWeights(std::span<const Complex> w, std::span<const Complex> y);

// Per-zone, per-bin covariance tracking and beamforming for one stream. The
// reference microphone of zone i is mic i.
class StreamingBeamformer {
 public:
  StreamingBeamformer(std::size_t zones, std::size_t bins,
                      const MvdrConfig &cfg = {});

  // One frame. Snapshots and masks are Z x F, zone-major. Throws InvalidInput
  // for masks outside [0, 1] or wrong sizes; the state is unchanged then.
  void Update(std::span<const Complex> snapshot, std::span<const float> speech,
              std::span<const float> noise);

  // Update, refresh weights if due, and write the Z x F zone outputs.
  void Process(std::span<const Complex> snapshot, std::span<const float> speech,
               std::span<const float> noise, std::span<Complex> out);

  const Eigen::MatrixXcd &phi(std::size_t zone, std::size_t bin) const {
    return phi_[zone * bins_ + bin];
  }
  const Eigen::MatrixXcd &psi(std::size_t zone, std::size_t bin) const {
    return psi_[zone * bins_ + bin];
  }
  const Eigen::VectorXcd &weights(std::size_t zone, std::size_t bin) const {
    return weights_[zone * bins_ + bin];
  }

  std::size_t frame_count() const { return frames_; }
  std::size_t numerical_errors() const { return numerical_errors_; }
  std::size_t passthrough_count() const { return passthroughs_; }
  std::size_t zones() const { return zones_; }
  std::size_t bins() const { return bins_; }

 private:
  void RefreshWeights();

  std::size_t zones_, bins_;
  MvdrConfig cfg_;
  std::size_t frames_ = 0;
  std::size_t numerical_errors_ = 0;
  std::size_t passthroughs_ = 0;
  std::vector<Eigen::MatrixXcd> phi_, psi_;
  std::vector<Eigen::VectorXcd> weights_;
};

struct MvdrStats {
  std::size_t numerical_errors = 0;
  std::size_t passthroughs = 0;
};

// Frame-ordered loop over a whole spectrogram: update, weights, apply.
ComplexSpectrogram SeparateStream(const ComplexSpectrogram &y,
                                  const MaskPair &masks,
                                  const MvdrConfig &cfg = {},
                                  MvdrStats *stats = nullptr);

}  // namespace cabinsep

#endif  // CABINSEP_MVDR_MVDR_H_
