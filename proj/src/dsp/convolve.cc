#include "cabinsep/dsp/convolve.h"

#include <algorithm>

#include "cabinsep/common.h"
#include "cabinsep/dsp/fft.h"

namespace cabinsep {

namespace {

constexpr std::size_t kDirectLimit = 64;

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Signal DirectConvolve(std::span<const double> x, std::span<const double> h) {
  Signal y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    for (std::size_t k = 0; k < h.size(); ++k) y[i + k] += xi * h[k];
  }
  return y;
}

}  // namespace

Signal Convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) throw InvalidInput("convolution of empty operand");
  if (std::min(x.size(), h.size()) <= kDirectLimit) {
    return x.size() >= h.size() ? DirectConvolve(x, h) : DirectConvolve(h, x);
  }
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = NextPow2(out_len);
  RealFft fft(n);
  std::vector<double> a(n, 0.0), b(n, 0.0);
  std::copy(x.begin(), x.end(), a.begin());
  std::copy(h.begin(), h.end(), b.begin());
  std::vector<Complex> fa(fft.bins()), fb(fft.bins());
  fft.Forward(a, fa);
  fft.Forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.Inverse(fa, a);
  a.resize(out_len);
  return a;
}

MultichannelWaveform Convolve(const MultichannelWaveform &x,
                              std::span<const double> h) {
  x.Validate();
  MultichannelWaveform y;
  y.sample_rate = x.sample_rate;
  for (const auto &c : x.channels) y.channels.push_back(Convolve(c, h));
  return y;
}

Signal CircularConvolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size())
    throw InvalidInput("circular convolution needs equal, non-empty lengths");
  RealFft fft(a.size());
  std::vector<Complex> fa(fft.bins()), fb(fft.bins());
  fft.Forward(a, fa);
  fft.Forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  Signal y(a.size());
  fft.Inverse(fa, y);
  return y;
}

}  // namespace cabinsep
