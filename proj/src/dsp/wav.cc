#include "cabinsep/dsp/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "cabinsep/common.h"

namespace cabinsep {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T ReadLe(const std::vector<char> &buf, std::size_t pos) {
  if (pos + sizeof(T) > buf.size()) throw InvalidInput("truncated WAV header");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void WriteLe(std::ofstream &out, T v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

}  // namespace

MultichannelWaveform ReadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw InvalidInput(path + ": not a RIFF/WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const char *data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::size_t size = ReadLe<uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(buf.data() + pos, "fmt ", 4) == 0) {
      format = ReadLe<uint16_t>(buf, body);
      channels = ReadLe<uint16_t>(buf, body + 2);
      rate = ReadLe<uint32_t>(buf, body + 4);
      bits = ReadLe<uint16_t>(buf, body + 14);
      if (format == kFormatExtensible && size >= 26)
        format = ReadLe<uint16_t>(buf, body + 24);
    } else if (std::memcmp(buf.data() + pos, "data", 4) == 0) {
      data = buf.data() + body;
      data_size = std::min(size, buf.size() - body);
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || rate == 0) throw InvalidInput(path + ": missing fmt chunk");
  if (data == nullptr) throw InvalidInput(path + ": missing data chunk");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw InvalidInput(path + ": only PCM16 and float32 WAV are supported");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  MultichannelWaveform w(channels, frames, static_cast<int>(rate));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const char *p = data + (i * channels + c) * width;
      if (pcm16) {
        int16_t s;
        std::memcpy(&s, p, 2);
        w.channels[c][i] = s / 32768.0;
      } else {
        float s;
        std::memcpy(&s, p, 4);
        w.channels[c][i] = s;
      }
    }
  }
  return w;
}

void WriteWav(const std::string &path, const MultichannelWaveform &w,
              WavFormat format) {
  w.Validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  const uint16_t channels = static_cast<uint16_t>(w.NumChannels());
  const uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const uint32_t block = channels * bits / 8;
  const uint32_t data_size = static_cast<uint32_t>(w.NumSamples() * block);

  out.write("RIFF", 4);
  WriteLe<uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  WriteLe<uint32_t>(out, 16);
  WriteLe<uint16_t>(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  WriteLe<uint16_t>(out, channels);
  WriteLe<uint32_t>(out, static_cast<uint32_t>(w.sample_rate));
  WriteLe<uint32_t>(out, static_cast<uint32_t>(w.sample_rate) * block);
  WriteLe<uint16_t>(out, static_cast<uint16_t>(block));
  WriteLe<uint16_t>(out, bits);
  out.write("data", 4);
  WriteLe<uint32_t>(out, data_size);
  for (std::size_t i = 0; i < w.NumSamples(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = w.channels[c][i];
      if (format == WavFormat::kPcm16) {
        const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        WriteLe<int16_t>(out, static_cast<int16_t>(s));
      } else {
        WriteLe<float>(out, static_cast<float>(v));
      }
    }
  }
  if (!out) throw InvalidInput("failed writing " + path);
}

}  // namespace cabinsep
