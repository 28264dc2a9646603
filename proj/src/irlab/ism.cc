#include "cabinsep/irlab/ism.h"

#include <cmath>
#include <numbers>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

bool Inside(const Vec3 &p, const Vec3 &d) {
  return p.x > 0.0 && p.x < d.x && p.y > 0.0 && p.y < d.y && p.z > 0.0 &&
         p.z < d.z;
}

// Adds `amplitude` delayed by `delay` samples.
void AddArrival(Signal &h, double delay, double amplitude, FractionalDelay mode) {
  const auto n = static_cast<std::ptrdiff_t>(h.size());
  if (mode == FractionalDelay::kNearestSample) {
    const auto k = static_cast<std::ptrdiff_t>(std::lround(delay));
    if (k >= 0 && k < n) h[k] += amplitude;
    return;
  }
  constexpr double kHalf = kSincTaps / 2.0;
  const auto first = static_cast<std::ptrdiff_t>(std::floor(delay)) - kSincTaps / 2 + 1;
  for (std::ptrdiff_t k = first; k < first + kSincTaps; ++k) {
    if (k < 0 || k >= n) continue;
    const double x = static_cast<double>(k) - delay;
    if (std::abs(x) >= kHalf) continue;
    const double px = std::numbers::pi * x;
    const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(px) / px;
    const double window = 0.5 + 0.5 * std::cos(px / kHalf);
    h[k] += amplitude * sinc * window;
  }
}

}  // namespace

double Distance(const Vec3 &a, const Vec3 &b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

std::string ToString(IrOrigin origin) {
  switch (origin) {
    case IrOrigin::kSimulated: return "simulated";
    case IrOrigin::kRecorded: return "recorded";
    case IrOrigin::kSyntheticTest: return "synthetic-test";
  }
  return "simulated";
}

IrOrigin ParseIrOrigin(const std::string &s) {
  if (s == "simulated") return IrOrigin::kSimulated;
  if (s == "recorded") return IrOrigin::kRecorded;
  if (s == "synthetic-test") return IrOrigin::kSyntheticTest;
  throw InvalidInput("unknown IR origin '" + s + "'");
}

void ImpulseResponse::Validate() const {
  if (taps.empty()) throw InvalidInput("impulse response is empty");
  for (double v : taps)
    if (!std::isfinite(v)) throw InvalidInput("impulse response has non-finite taps");
  if (sample_rate <= 0) throw InvalidInput("impulse response sample rate must be positive");
}

void RoomSpec::Validate() const {
  if (!(dimensions.x > 0 && dimensions.y > 0 && dimensions.z > 0))
    throw InvalidConfig("room dimensions must be positive");
  for (double b : beta)
    if (!(b >= 0.0 && b < 1.0))
      throw InvalidConfig("reflection coefficients must lie in [0, 1)");
  if (max_order < 0) throw InvalidConfig("max image order must be >= 0");
  if (!(speed_of_sound > 0.0) || sample_rate <= 0 || ir_length == 0)
    throw InvalidConfig("bad speed of sound, sample rate or IR length");
  if (!Inside(source, dimensions))
    throw InvalidInput("source must lie strictly inside the room");
  if (mics.empty()) throw InvalidInput("room has no microphones");
  for (const auto &m : mics)
    if (!Inside(m, dimensions))
      throw InvalidInput("microphones must lie strictly inside the room");
}

ImpulseResponse SimulateIsm(const RoomSpec &room, std::size_t mic) {
  room.Validate();
  if (mic >= room.mics.size()) throw InvalidInput("microphone index out of range");
  const Vec3 &r = room.mics[mic];
  const Vec3 &s = room.source;
  const Vec3 &dim = room.dimensions;
  const int k = room.max_order;
  const double samples_per_meter = room.sample_rate / room.speed_of_sound;

  ImpulseResponse ir;
  ir.taps.assign(room.ir_length, 0.0);
  ir.sample_rate = room.sample_rate;
  ir.source = s;
  ir.mic = r;
  ir.origin = IrOrigin::kSimulated;

  // Image coordinate along one axis: (1 - 2q) s + 2 n L, hitting the near
  // wall |n - q| times and the far wall |n| times.
  for (int nx = -k; nx <= k; ++nx)
    for (int qx = 0; qx <= 1; ++qx) {
      const int ox = std::abs(nx - qx) + std::abs(nx);
      if (ox > k) continue;
      const double ix = (1 - 2 * qx) * s.x + 2.0 * nx * dim.x;
      const double gx = std::pow(room.beta[0], std::abs(nx - qx)) *
                        std::pow(room.beta[1], std::abs(nx));
      if (gx == 0.0) continue;
      for (int ny = -k; ny <= k; ++ny)
        for (int qy = 0; qy <= 1; ++qy) {
          const int oy = std::abs(ny - qy) + std::abs(ny);
          if (ox + oy > k) continue;
          const double iy = (1 - 2 * qy) * s.y + 2.0 * ny * dim.y;
          const double gy = gx * std::pow(room.beta[2], std::abs(ny - qy)) *
                            std::pow(room.beta[3], std::abs(ny));
          if (gy == 0.0) continue;
          for (int nz = -k; nz <= k; ++nz)
            for (int qz = 0; qz <= 1; ++qz) {
              const int oz = std::abs(nz - qz) + std::abs(nz);
              if (ox + oy + oz > k) continue;
              const double iz = (1 - 2 * qz) * s.z + 2.0 * nz * dim.z;
              const double g = gy * std::pow(room.beta[4], std::abs(nz - qz)) *
                               std::pow(room.beta[5], std::abs(nz));
              if (g == 0.0) continue;
              const double d = Distance({ix, iy, iz}, r);
              const double delay = d * samples_per_meter;
              if (delay - kSincTaps / 2.0 >= static_cast<double>(room.ir_length))
                continue;
              AddArrival(ir.taps, delay, g / (4.0 * std::numbers::pi * d),
                         room.delay);
            }
        }
    }
  return ir;
}

std::vector<ImpulseResponse> SimulateIsmAll(const RoomSpec &room) {
  std::vector<ImpulseResponse> out;
  for (std::size_t m = 0; m < room.mics.size(); ++m) out.push_back(SimulateIsm(room, m));
  return out;
}

std::vector<Vec3> CabinLayout::Mics() {
  return {{0.9, 0.45, 1.15}, {0.9, 1.05, 1.15}, {1.9, 0.2, 1.15}, {1.9, 1.3, 1.15}};
}

Vec3 CabinLayout::Seat(std::size_t zone) {
  static const Vec3 kSeats[kZones] = {
      {1.05, 0.42, 0.9}, {1.05, 1.08, 0.9}, {2.05, 0.35, 0.85}, {2.05, 1.15, 0.85}};
  if (zone >= kZones) throw InvalidInput("cabin zone index out of range");
  return kSeats[zone];
}

Vec3 CabinLayout::FrontBoundary() { return {1.05, 0.75, 0.9}; }

RoomSpec CabinLayout::Room(const Vec3 &source, double beta) {
  RoomSpec room;
  room.dimensions = {2.8, 1.5, 1.2};
  room.SetBeta(beta);
  room.source = source;
  room.mics = Mics();
  return room;
}

}  // namespace cabinsep
