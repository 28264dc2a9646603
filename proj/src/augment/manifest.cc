#include "cabinsep/augment/manifest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cabinsep/common.h"
#include "cabinsep/dsp/wav.h"
#include "cabinsep/irlab/ir_set.h"

namespace cabinsep {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string Resolve(const std::string &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).string();
}

MultichannelWaveform LoadAudio(const std::string &path, int rate) {
  auto w = ReadWav(path);
  if (w.sample_rate != rate)
    throw InvalidInput(path + ": sample rate " + std::to_string(w.sample_rate) +
                       " does not match the scene rate " + std::to_string(rate));
  return w;
}

std::vector<ImpulseResponse> LoadIrs(const json &entry, const std::string &base,
                                     std::size_t zones, int rate,
                                     std::vector<std::string> *files) {
  std::vector<ImpulseResponse> irs;
  if (entry.contains("irs")) {
    for (const auto &f : entry.at("irs")) {
      const std::string path = Resolve(base, f.get<std::string>());
      files->push_back(f.get<std::string>());
      irs.push_back(ReadImpulseResponse(path));
      if (irs.back().sample_rate != rate)
        throw InvalidInput(path + ": IR sample rate does not match the scene");
    }
  } else if (entry.contains("ism")) {
    const auto &ism = entry.at("ism");
    const auto &src = ism.at("source");
    if (!src.is_array() || src.size() != 3)
      throw InvalidManifest("ism.source must be [x, y, z]");
    auto room = CabinLayout::Room({src[0].get<double>(), src[1].get<double>(),
                                   src[2].get<double>()},
                                  ism.value("beta", 0.7));
    room.max_order = ism.value("order", room.max_order);
    room.sample_rate = rate;
    if (room.mics.size() != zones)
      throw InvalidManifest("ism IRs need a 4-zone scene");
    try {
      irs = SimulateIsmAll(room);
    } catch (const InvalidInput &e) {
      throw InvalidManifest(std::string("ism: ") + e.what());
    } catch (const InvalidConfig &e) {
      throw InvalidManifest(std::string("ism: ") + e.what());
    }
  }
  return irs;
}

NoiseEntry ParseNoise(const json &j, const std::string &base, std::size_t zones,
                      int rate) {
  NoiseEntry n;
  n.file = j.at("file").get<std::string>();
  n.snr_db = j.at("snr_db").get<double>();
  const auto onset = j.value("onset", std::int64_t{0});
  if (onset < 0) throw InvalidManifest("onset must be >= 0");
  n.onset = static_cast<std::size_t>(onset);
  n.samples = LoadAudio(Resolve(base, n.file), rate);
  n.irs = LoadIrs(j, base, zones, rate, &n.ir_files);
  return n;
}

}  // namespace

SceneManifest ParseManifest(const std::string &text, const std::string &base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw InvalidManifest(std::string("manifest is not valid JSON: ") + e.what());
  }
  SceneManifest m;
  try {
    m.sample_rate = j.value("sample_rate", 16000);
    const auto zones = j.value("zones", 4);
    if (zones < 1) throw InvalidManifest("zones must be >= 1");
    m.zones = static_cast<std::size_t>(zones);
    m.seed = j.value("seed", std::uint64_t{0});
    m.training_snr_ranges = j.value("training_snr_ranges", true);
    if (j.contains("length")) {
      const auto len = j.at("length").get<std::int64_t>();
      if (len <= 0) throw InvalidManifest("length must be positive");
      m.length = static_cast<std::size_t>(len);
    }
    for (const auto &s : j.at("speakers")) {
      SpeakerEntry e;
      const int zone = s.at("zone").get<int>();
      if (zone < 1 || static_cast<std::size_t>(zone) > m.zones)
        throw InvalidManifest("speaker zone " + std::to_string(zone) + " out of range");
      e.zone = static_cast<std::size_t>(zone - 1);
      e.speech_file = s.at("speech").get<std::string>();
      e.gain = s.value("gain", 1.0);
      const auto audio = LoadAudio(Resolve(base, e.speech_file), m.sample_rate);
      if (audio.NumChannels() != 1)
        throw InvalidManifest(e.speech_file + ": speech must be mono");
      e.speech = audio.channels[0];
      e.irs = LoadIrs(s, base, m.zones, m.sample_rate, &e.ir_files);
      m.speakers.push_back(std::move(e));
    }
    if (j.contains("background"))
      m.background = ParseNoise(j.at("background"), base, m.zones, m.sample_rate);
    if (j.contains("transients"))
      for (const auto &t : j.at("transients"))
        m.transients.push_back(ParseNoise(t, base, m.zones, m.sample_rate));
  } catch (const json::exception &e) {
    throw InvalidManifest(std::string("bad manifest field: ") + e.what());
  }
  m.Validate();
  return m;
}

SceneManifest LoadManifest(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open manifest " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ParseManifest(ss.str(), fs::path(path).parent_path().string());
}

std::string FormatManifest(const SceneManifest &m) {
  json j;
  j["sample_rate"] = m.sample_rate;
  j["zones"] = m.zones;
  j["seed"] = m.seed;
  j["training_snr_ranges"] = m.training_snr_ranges;
  if (m.length) j["length"] = *m.length;
  j["speakers"] = json::array();
  for (const auto &s : m.speakers) {
    json e;
    e["zone"] = s.zone + 1;
    e["speech"] = s.speech_file;
    e["gain"] = s.gain;
    e["irs"] = s.ir_files;
    j["speakers"].push_back(e);
  }
  auto noise = [](const NoiseEntry &n) {
    json e;
    e["file"] = n.file;
    e["snr_db"] = n.snr_db;
    if (n.onset) e["onset"] = n.onset;
    if (!n.ir_files.empty()) e["irs"] = n.ir_files;
    return e;
  };
  if (m.background) j["background"] = noise(*m.background);
  if (!m.transients.empty()) {
    j["transients"] = json::array();
    for (const auto &t : m.transients) j["transients"].push_back(noise(t));
  }
  return j.dump(2) + "\n";
}

}  // namespace cabinsep
