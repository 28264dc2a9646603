#include "cabinsep/irlab/excitation.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cabinsep/common.h"
#include "cabinsep/dsp/convolve.h"
#include "cabinsep/dsp/fft.h"

namespace cabinsep {

namespace {

constexpr double kPi = std::numbers::pi;

// Feedback taps (1-based register positions) of primitive polynomials.
const std::vector<int> &MlsTaps(int order) {
  static const std::vector<std::vector<int>> kTaps = {
      {2, 1},          {3, 2},      {4, 3},          {5, 3},      {6, 5},
      {7, 6},          {8, 6, 5, 4}, {9, 5},         {10, 7},     {11, 9},
      {12, 6, 4, 1},   {13, 4, 3, 1}, {14, 5, 3, 1}, {15, 14},    {16, 15, 13, 4},
      {17, 14},        {18, 11},    {19, 6, 2, 1},   {20, 17}};
  if (order < 2 || order > 20) throw InvalidConfig("MLS order must be in [2, 20]");
  return kTaps[order - 2];
}

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Real signal from a one-sided spectrum of an n-point sequence.
Signal InverseReal(const std::vector<Complex> &spec, std::size_t n) {
  RealFft fft(n);
  Signal out(n);
  fft.Inverse(spec, out);
  return out;
}

Signal Roll(const Signal &x, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  Signal out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) out[((i + shift) % n + n) % n] = x[i];
  return out;
}

Signal TspWithSign(std::size_t n, std::size_t m, double sign) {
  std::vector<Complex> spec(n / 2 + 1);
  const std::uint64_t nn = static_cast<std::uint64_t>(n) * n;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    // 4 pi m k^2 / N^2 reduced modulo 2 pi in integer arithmetic.
    const std::uint64_t r = (2 * static_cast<std::uint64_t>(m) * k * k) % nn;
    spec[k] = std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(r) /
                                  static_cast<double>(nn));
  }
  return InverseReal(spec, n);
}

}  // namespace

std::string ToString(ExcitationKind kind) {
  switch (kind) {
    case ExcitationKind::kEss: return "ess";
    case ExcitationKind::kMls: return "mls";
    case ExcitationKind::kTsp: return "tsp";
  }
  return "ess";
}

ExcitationKind ParseExcitationKind(const std::string &s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), ::tolower);
  if (l == "ess") return ExcitationKind::kEss;
  if (l == "mls") return ExcitationKind::kMls;
  if (l == "tsp") return ExcitationKind::kTsp;
  throw InvalidConfig("unknown excitation kind '" + s + "'");
}

void ExcitationSpec::Validate() const {
  if (sample_rate <= 0) throw InvalidConfig("sample rate must be positive");
  switch (kind) {
    case ExcitationKind::kEss:
      if (!(f_start > 0.0 && f_start < f_end && f_end <= sample_rate / 2.0))
        throw InvalidConfig("sweep band must satisfy 0 < f_start < f_end <= fs/2");
      if (!(duration > 0.0) || duration * sample_rate < 2.0)
        throw InvalidConfig("sweep duration too short");
      break;
    case ExcitationKind::kMls:
      MlsTaps(mls_order);
      if (periods == 0) throw InvalidConfig("periods must be >= 1");
      break;
    case ExcitationKind::kTsp:
      if (tsp_length < 4 || (tsp_length & (tsp_length - 1)) != 0)
        throw InvalidConfig("TSP length must be a power of two >= 4");
      if (tsp_stretch == 0 || tsp_stretch >= tsp_length / 2)
        throw InvalidConfig("TSP stretch must lie in [1, N/2)");
      if (periods == 0) throw InvalidConfig("periods must be >= 1");
      break;
  }
}

std::size_t ExcitationSpec::PeriodLength() const {
  switch (kind) {
    case ExcitationKind::kEss:
      return static_cast<std::size_t>(std::llround(duration * sample_rate));
    case ExcitationKind::kMls: return (std::size_t{1} << mls_order) - 1;
    case ExcitationKind::kTsp: return tsp_length;
  }
  return 0;
}

Signal GenerateEss(const ExcitationSpec &spec) {
  spec.Validate();
  const std::size_t n = spec.PeriodLength();
  const double l = spec.duration / std::log(spec.f_end / spec.f_start);
  const double k1 = 2.0 * kPi * spec.f_start * l;
  Signal x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate;
    x[i] = std::sin(k1 * (std::exp(t / l) - 1.0));
  }
  return x;
}

Signal EssInverseFilter(const ExcitationSpec &spec) {
  const Signal x = GenerateEss(spec);
  const std::size_t n = x.size();
  const double l = spec.duration / std::log(spec.f_end / spec.f_start);
  Signal inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate;
    inv[i] = x[n - 1 - i] * std::exp(-t / l);
  }
  const std::size_t size = NextPow2(2 * n);
  RealFft fft(size);
  Signal px(size, 0.0), pi(size, 0.0);
  std::copy(x.begin(), x.end(), px.begin());
  std::copy(inv.begin(), inv.end(), pi.begin());
  std::vector<Complex> sx(fft.bins()), si(fft.bins());
  fft.Forward(px, sx);
  fft.Forward(pi, si);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < fft.bins(); ++k) {
    const double f = static_cast<double>(k) * spec.sample_rate / size;
    if (f < spec.f_start || f > spec.f_end) continue;
    sum += std::abs(sx[k] * si[k]);
    ++count;
  }
  const double gain = sum / static_cast<double>(count);
  for (auto &v : inv) v /= gain;
  return inv;
}

Signal GenerateMls(int order) {
  const auto &taps = MlsTaps(order);
  const std::size_t length = (std::size_t{1} << order) - 1;
  std::uint32_t reg = (1u << order) - 1;  // all ones
  Signal out(length);
  for (std::size_t i = 0; i < length; ++i) {
    const std::uint32_t bit = reg & 1u;
    out[i] = bit ? -1.0 : 1.0;
    std::uint32_t fb = 0;
    for (int t : taps) fb ^= (reg >> (order - t)) & 1u;
    reg = (reg >> 1) | (fb << (order - 1));
  }
  return out;
}

Signal GenerateTsp(std::size_t length, std::size_t stretch) {
  ExcitationSpec spec;
  spec.kind = ExcitationKind::kTsp;
  spec.tsp_length = length;
  spec.tsp_stretch = stretch;
  spec.Validate();
  return Roll(TspWithSign(length, stretch, 1.0),
              static_cast<std::ptrdiff_t>(length / 2 - stretch));
}

Signal TspInverse(std::size_t length, std::size_t stretch) {
  ExcitationSpec spec;
  spec.kind = ExcitationKind::kTsp;
  spec.tsp_length = length;
  spec.tsp_stretch = stretch;
  spec.Validate();
  return Roll(TspWithSign(length, stretch, -1.0),
              -static_cast<std::ptrdiff_t>(length / 2 - stretch));
}

Signal GenerateExcitation(const ExcitationSpec &spec) {
  spec.Validate();
  Signal period;
  switch (spec.kind) {
    case ExcitationKind::kEss: return GenerateEss(spec);
    case ExcitationKind::kMls: period = GenerateMls(spec.mls_order); break;
    case ExcitationKind::kTsp: period = GenerateTsp(spec.tsp_length, spec.tsp_stretch); break;
  }
  Signal out;
  out.reserve(period.size() * spec.periods);
  for (std::size_t p = 0; p < spec.periods; ++p)
    out.insert(out.end(), period.begin(), period.end());
  return out;
}

ImpulseResponse ExtractIr(std::span<const double> recording,
                          const ExcitationSpec &spec, std::size_t ir_length) {
  spec.Validate();
  if (ir_length == 0) throw InvalidInput("IR length must be positive");
  const std::size_t period = spec.PeriodLength();
  const std::size_t played =
      spec.kind == ExcitationKind::kEss ? period : period * spec.periods;
  if (recording.size() < played)
    throw InvalidInput("recording is shorter than the excitation");

  ImpulseResponse ir;
  ir.sample_rate = spec.sample_rate;
  ir.origin = IrOrigin::kRecorded;
  ir.taps.assign(ir_length, 0.0);

  if (spec.kind == ExcitationKind::kEss) {
    const Signal full = Convolve(recording, EssInverseFilter(spec));
    for (std::size_t i = 0; i < ir_length && period - 1 + i < full.size(); ++i)
      ir.taps[i] = full[period - 1 + i];
    return ir;
  }

  // Steady-state last period: circular convolution of one period with the IR.
  const std::span<const double> last =
      recording.subspan((spec.periods - 1) * period, period);
  Signal h;
  if (spec.kind == ExcitationKind::kMls) {
    const Signal s = GenerateMls(spec.mls_order);
    Signal reversed(period);
    for (std::size_t i = 0; i < period; ++i) reversed[i] = s[(period - i) % period];
    const Signal xcorr = CircularConvolve(last, reversed);
    double sum = 0.0;
    for (double v : xcorr) sum += v;
    h.resize(period);
    for (std::size_t i = 0; i < period; ++i)
      h[i] = (xcorr[i] + sum) / static_cast<double>(period + 1);
  } else {
    h = CircularConvolve(last, TspInverse(spec.tsp_length, spec.tsp_stretch));
  }
  for (std::size_t i = 0; i < ir_length && i < h.size(); ++i) ir.taps[i] = h[i];
  return ir;
}

}  // namespace cabinsep
