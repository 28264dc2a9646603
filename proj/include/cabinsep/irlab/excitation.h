#ifndef CABINSEP_IRLAB_EXCITATION_H_
#define CABINSEP_IRLAB_EXCITATION_H_

#include <cstddef>
#include <string>

#include "cabinsep/dsp/waveform.h"
#include "cabinsep/irlab/ism.h"

namespace cabinsep {

enum class ExcitationKind { kEss, kMls, kTsp };
std::string ToString(ExcitationKind kind);
ExcitationKind ParseExcitationKind(const std::string &s);

// Measurement defaults are desk-scale choices, not taken from any recording
// campaign: a 2 s sweep from 20 Hz to 7.8 kHz, an order-14 MLS and a 16384
// point TSP, each periodic signal played twice.
struct ExcitationSpec {
  ExcitationKind kind = ExcitationKind::kEss;
  int sample_rate = 16000;
  // ESS
  double duration = 2.0;
  double f_start = 10.0;
  double f_end = 8000.0;
  // MLS
  int mls_order = 14;
  // TSP
  std::size_t tsp_length = 16384;
  std::size_t tsp_stretch = 4096;
  // MLS and TSP are periodic; the last period is analysed.
  std::size_t periods = 2;

  // Throws InvalidConfig.
  void Validate() const;
  // Length of one excitation period (the whole sweep for ESS).
  std::size_t PeriodLength() const;
};

// x(t) = sin(K1 (exp(t / L) - 1)), K1 = 2 pi f1 L, L = T / ln(f2 / f1).
Signal GenerateEss(const ExcitationSpec &spec);
// Time-reversed sweep with a -6 dB/octave envelope, scaled so that the
// sweep convolved with it has unit gain on average over the sweep band.
Signal EssInverseFilter(const ExcitationSpec &spec);

// +-1 maximal-length sequence of length 2^m - 1, 2 <= m <= 20, from a
// Fibonacci LFSR with a fixed primitive feedback polynomial per order.
Signal GenerateMls(int order);

// Aoshima time-stretched pulse: H(k) = exp(j 4 pi m k^2 / N^2), made
// conjugate-symmetric and circularly shifted by N/2 - m so the energy is
// centred. The inverse has the conjugate spectrum and the opposite shift.
Signal GenerateTsp(std::size_t length, std::size_t stretch);
Signal TspInverse(std::size_t length, std::size_t stretch);

// Signal to play: the sweep, or `periods` back-to-back copies of the MLS/TSP.
Signal GenerateExcitation(const ExcitationSpec &spec);

// Deconvolves a recording of the excitation through an unknown system and
// returns the first `ir_length` taps. Direct paths keep their propagation
// delay. Throws InvalidInput when the recording is shorter than the played
// excitation.
ImpulseResponse ExtractIr(std::span<const double> recording,
                          const ExcitationSpec &spec, std::size_t ir_length);

}  // namespace cabinsep

#endif  // CABINSEP_IRLAB_EXCITATION_H_
