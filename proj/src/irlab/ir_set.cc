#include "cabinsep/irlab/ir_set.h"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cabinsep/dsp/wav.h"

namespace cabinsep {

namespace {

using nlohmann::json;

const IrBundle &Pick(const IrSet &set, std::size_t zone, const char *what,
                     Rng &rng) {
  std::vector<const IrBundle *> match;
  for (const auto &b : set)
    if (b.source_zone == zone) match.push_back(&b);
  if (match.empty())
    throw InvalidInput(std::string("no ") + what + " IRs for zone " +
                       std::to_string(zone + 1));
  return *match[UniformIndex(rng, match.size())];
}

json ToJson(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

Vec3 Vec3FromJson(const json &j) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput("position must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string ToString(IrStrategy s) {
  switch (s) {
    case IrStrategy::kMixed: return "mixed";
    case IrStrategy::kAdded: return "added";
    case IrStrategy::kOnly: return "only";
    case IrStrategy::kSimulated: return "simulated";
  }
  return "mixed";
}

IrStrategy ParseIrStrategy(const std::string &s) {
  if (s == "mixed") return IrStrategy::kMixed;
  if (s == "added") return IrStrategy::kAdded;
  if (s == "only") return IrStrategy::kOnly;
  if (s == "simulated") return IrStrategy::kSimulated;
  throw InvalidConfig("unknown IR strategy '" + s + "'");
}

std::vector<ImpulseResponse> MixIrSets(const IrSet &simulated,
                                       const IrSet &recorded,
                                       IrStrategy strategy,
                                       std::size_t speaker_zone, Rng &rng) {
  const bool need_sim = strategy != IrStrategy::kOnly;
  const bool need_rec = strategy != IrStrategy::kSimulated;
  bool all_recorded = strategy == IrStrategy::kOnly;
  if (strategy == IrStrategy::kAdded)
    all_recorded = UniformUnit(rng) < kAddedRecordedFraction;

  const IrBundle *sim = need_sim ? &Pick(simulated, speaker_zone, "simulated", rng) : nullptr;
  const IrBundle *rec = need_rec ? &Pick(recorded, speaker_zone, "recorded", rng) : nullptr;
  if (sim && rec && sim->per_mic.size() != rec->per_mic.size())
    throw InvalidInput("simulated and recorded bundles differ in microphone count");
  const std::size_t z = sim ? sim->per_mic.size() : rec->per_mic.size();
  if (speaker_zone >= z) throw InvalidInput("speaker zone out of range");

  std::vector<ImpulseResponse> out;
  for (std::size_t m = 0; m < z; ++m) {
    bool use_rec = false;
    switch (strategy) {
      case IrStrategy::kMixed: use_rec = m == speaker_zone; break;
      case IrStrategy::kAdded: use_rec = all_recorded; break;
      case IrStrategy::kOnly: use_rec = true; break;
      case IrStrategy::kSimulated: use_rec = false; break;
    }
    out.push_back(use_rec ? rec->per_mic[m] : sim->per_mic[m]);
  }
  return out;
}

void WriteImpulseResponse(const std::string &wav_path, const ImpulseResponse &ir) {
  ir.Validate();
  WriteWav(wav_path, MultichannelWaveform::Mono(ir.taps, ir.sample_rate),
           WavFormat::kFloat32);
  json meta;
  meta["origin"] = ToString(ir.origin);
  meta["sample_rate"] = ir.sample_rate;
  meta["length"] = ir.taps.size();
  if (ir.zone) meta["zone"] = *ir.zone + 1;
  if (ir.source) meta["source"] = ToJson(*ir.source);
  if (ir.mic) meta["mic"] = ToJson(*ir.mic);
  std::ofstream os(wav_path + ".json");
  if (!os) throw InvalidInput("cannot write " + wav_path + ".json");
  os << meta.dump(2) << "\n";
}

ImpulseResponse ReadImpulseResponse(const std::string &wav_path) {
  const auto wav = ReadWav(wav_path);
  if (wav.NumChannels() != 1) throw InvalidInput("IR file must be mono: " + wav_path);
  ImpulseResponse ir;
  ir.taps = wav.channels[0];
  ir.sample_rate = wav.sample_rate;
  ir.origin = IrOrigin::kRecorded;
  const std::string meta_path = wav_path + ".json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream is(meta_path);
    json meta;
    try {
      is >> meta;
      if (meta.contains("origin")) ir.origin = ParseIrOrigin(meta["origin"].get<std::string>());
      if (meta.contains("zone")) {
        const int zone = meta["zone"].get<int>();
        if (zone < 1) throw InvalidInput("IR zone must be >= 1");
        ir.zone = static_cast<std::size_t>(zone - 1);
      }
      if (meta.contains("source")) ir.source = Vec3FromJson(meta["source"]);
      if (meta.contains("mic")) ir.mic = Vec3FromJson(meta["mic"]);
    } catch (const json::exception &e) {
      throw InvalidInput("bad IR sidecar " + meta_path + ": " + e.what());
    }
  }
  ir.Validate();
  return ir;
}

}  // namespace cabinsep
