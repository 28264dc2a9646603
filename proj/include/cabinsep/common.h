#ifndef CABINSEP_COMMON_H_
#define CABINSEP_COMMON_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cabinsep {

// Error taxonomy shared by every module. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InvalidManifest : public Error {
 public:
  using Error::Error;
};

class WeightShapeError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits. Unlike std::uniform_real_distribution
// the mapping is fixed, so seeded streams are bit-identical across toolchains.
inline double UniformUnit(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double Uniform(Rng &rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

inline std::size_t UniformIndex(Rng &rng, std::size_t n) {
  return static_cast<std::size_t>(UniformUnit(rng) * static_cast<double>(n));
}

// Box-Muller, same rationale as UniformUnit.
inline double Gaussian(Rng &rng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double u1 = UniformUnit(rng);
  double u2 = UniformUnit(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace cabinsep

#endif  // CABINSEP_COMMON_H_
