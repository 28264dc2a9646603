#ifndef CABINSEP_IRLAB_ISM_H_
#define CABINSEP_IRLAB_ISM_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cabinsep/dsp/waveform.h"

namespace cabinsep {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  bool operator==(const Vec3 &) const = default;
};

double Distance(const Vec3 &a, const Vec3 &b);

enum class IrOrigin { kSimulated, kRecorded, kSyntheticTest };
std::string ToString(IrOrigin origin);
IrOrigin ParseIrOrigin(const std::string &s);

struct ImpulseResponse {
  Signal taps;
  int sample_rate = 16000;
  std::optional<std::size_t> zone;  // 0-based
  std::optional<Vec3> source, mic;
  IrOrigin origin = IrOrigin::kSimulated;

  // Throws InvalidInput for an empty or non-finite IR.
  void Validate() const;
};

enum class FractionalDelay { kWindowedSinc, kNearestSample };

// Shoebox room with frequency-independent wall reflection coefficients,
// ordered x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
struct RoomSpec {
  Vec3 dimensions{2.8, 1.5, 1.2};
  std::array<double, 6> beta{0.7, 0.7, 0.7, 0.7, 0.7, 0.7};
  Vec3 source;
  std::vector<Vec3> mics;
  int max_order = 10;
  double speed_of_sound = 343.0;
  int sample_rate = 16000;
  std::size_t ir_length = 2048;
  FractionalDelay delay = FractionalDelay::kWindowedSinc;

  void SetBeta(double b) { beta.fill(b); }
  // Throws InvalidInput for positions not strictly inside the room and
  // InvalidConfig for bad coefficients, order or length.
  void Validate() const;
};

// Width of the Hann-windowed sinc used for fractional delays.
inline constexpr int kSincTaps = 16;

ImpulseResponse SimulateIsm(const RoomSpec &room, std::size_t mic);
std::vector<ImpulseResponse> SimulateIsmAll(const RoomSpec &room);

// Stand-in car cabin: 2.8 x 1.5 x 1.2 m, one microphone per zone near the
// headliner, zones 1/2 in the front row and 3/4 in the rear.
struct CabinLayout {
  static constexpr std::size_t kZones = 4;
  static std::vector<Vec3> Mics();
  // Standard seated mouth position of zone `zone` (0-based).
  static Vec3 Seat(std::size_t zone);
  // Midway between the two front seats.
  static Vec3 FrontBoundary();
  static RoomSpec Room(const Vec3 &source, double beta = 0.7);
};

}  // namespace cabinsep

#endif  // CABINSEP_IRLAB_ISM_H_
