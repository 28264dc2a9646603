// Command-line front end. Every command validates its inputs before writing
// anything, prints a JSON report on stdout and a short summary on stderr.
//
// Exit codes: 0 ok, 2 input error, 3 config or weights error, 4 numerical
// failure.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cabinsep/augment/manifest.h"
#include "cabinsep/augment/scene.h"
#include "cabinsep/augment/synthetic.h"
#include "cabinsep/common.h"
#include "cabinsep/dsp/wav.h"
#include "cabinsep/irlab/excitation.h"
#include "cabinsep/irlab/ir_set.h"
#include "cabinsep/irlab/ism.h"
#include "cabinsep/metrics/metrics.h"
#include "cabinsep/model/config.h"
#include "cabinsep/model/macs.h"
#include "cabinsep/model/weights.h"
#include "cabinsep/pipeline/oracle.h"
#include "cabinsep/pipeline/separator.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace cabinsep {
namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInputError = 2, kConfigError = 3, kNumericalError = 4 };

struct ModelOptions {
  std::string config_path;
  std::string variant = "S";
  std::string weights_path;
  std::optional<std::uint64_t> seed;
  double lambda = 1.0;
  double loading = 1e-4;
  std::size_t recompute_every = 1;
  double chunk_seconds = 0.016;

  ModelConfig Config() const {
    return config_path.empty() ? ModelConfig::Preset(variant) : LoadModelConfig(config_path);
  }
  SeparatorConfig Separator() const {
    SeparatorConfig s;
    s.mvdr.forgetting = lambda;
    s.mvdr.loading = loading;
    s.mvdr.recompute_every = recompute_every;
    s.mvdr.Validate();
    return s;
  }
};

void AddModelFlags(CLI::App *cmd, ModelOptions &o) {
  cmd->add_option("--config", o.config_path, "model config file (key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--variant", o.variant, "model preset")
      ->check(CLI::IsMember({"S", "M", "L"}));
  cmd->add_option("--weights", o.weights_path, "weight container")->check(CLI::ExistingFile);
}

void AddMvdrFlags(CLI::App *cmd, ModelOptions &o) {
  cmd->add_option("--lambda", o.lambda, "covariance forgetting factor in (0, 1]");
  cmd->add_option("--loading", o.loading, "diagonal loading relative to tr/Z");
  cmd->add_option("--recompute-every", o.recompute_every, "weight update cadence in frames");
}

std::size_t ThreadBudget() {
  if (const char *env = std::getenv("CABINSEP_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception &) {
    }
    throw InvalidConfig(std::string("CABINSEP_THREADS must be a positive integer, got '") +
                        env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs job(i) for i in [0, n) on up to CABINSEP_THREADS threads. The first
// exception is rethrown after every worker has stopped.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)> &job) {
  const std::size_t workers = std::min(n, ThreadBudget());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto loop = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f << text;
}

void EnsureDirectory(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create " + dir.string() + ": " + ec.message());
}

bool AllFinite(const MultichannelWaveform &w) {
  for (const auto &ch : w.channels)
    for (double v : ch)
      if (!std::isfinite(v)) return false;
  return true;
}

MultichannelWaveform Channel(const MultichannelWaveform &w, std::size_t c) {
  return MultichannelWaveform::Mono(w.channels.at(c), w.sample_rate);
}

Vec3 ParseVec3(const std::string &s) {
  Vec3 v;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> v.x >> c1 >> v.y >> c2 >> v.z) || c1 != ',' || c2 != ',')
    throw InvalidInput("expected x,y,z but got '" + s + "'");
  return v;
}

json Vec3Json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

// ---------------------------------------------------------------- separate

struct SeparateJob {
  fs::path input, out_dir;
  MultichannelWaveform y;
  MultichannelWaveform zones;
  MvdrStats stats;
  std::size_t frames = 0;
  double seconds = 0.0;
};

int CmdSeparate(const ModelOptions &o, const std::vector<std::string> &inputs,
                const std::string &out_dir) {
  const ModelConfig cfg = o.Config();
  cfg.Validate();
  if (o.weights_path.empty()) throw InvalidConfig("--weights is required");
  const ModelWeights w = LoadWeights(o.weights_path);
  if (!w.fingerprint.empty() && w.fingerprint != cfg.Fingerprint())
    throw WeightShapeError("weights were made for '" + w.fingerprint +
                           "', the config is '" + cfg.Fingerprint() + "'");
  const Network net(cfg, w);
  const SeparatorConfig sep = o.Separator();
  if (!(o.chunk_seconds > 0.0)) throw InvalidConfig("--chunk-seconds must be positive");

  std::vector<SeparateJob> jobs(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto &j = jobs[i];
    j.input = inputs[i];
    j.y = ReadWav(inputs[i]);
    if (j.y.sample_rate != 16000) throw InvalidInput(inputs[i] + ": expected 16 kHz");
    if (j.y.NumChannels() != cfg.zones)
      throw InvalidInput(inputs[i] + ": " + std::to_string(j.y.NumChannels()) +
                         " channels, the model has " + std::to_string(cfg.zones) + " zones");
    if (j.y.Empty()) throw InvalidInput(inputs[i] + ": no samples");
    j.out_dir = inputs.size() == 1 ? fs::path(out_dir)
                                   : fs::path(out_dir) / fs::path(inputs[i]).stem();
  }

  const auto chunk = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(o.chunk_seconds * 16000)));
  ParallelFor(jobs.size(), [&](std::size_t i) {
    auto &j = jobs[i];
    const auto begin = std::chrono::steady_clock::now();
    StreamingSeparator s(net, sep);
    j.zones = MultichannelWaveform(cfg.zones, 0, j.y.sample_rate);
    auto append = [&](const MultichannelWaveform &part) {
      for (std::size_t z = 0; z < cfg.zones; ++z)
        j.zones.channels[z].insert(j.zones.channels[z].end(), part.channels[z].begin(),
                                   part.channels[z].end());
    };
    const std::size_t n = j.y.NumSamples();
    for (std::size_t pos = 0; pos < n; pos += chunk) {
      const std::size_t len = std::min(chunk, n - pos);
      MultichannelWaveform c(cfg.zones, len, j.y.sample_rate);
      for (std::size_t z = 0; z < cfg.zones; ++z)
        std::copy_n(j.y.channels[z].begin() + pos, len, c.channels[z].begin());
      append(s.Push(c));
    }
    append(s.Flush());
    j.stats = s.stats();
    j.frames = s.frames_processed();
    j.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    if (!AllFinite(j.zones)) throw NumericalError(j.input.string() + ": non-finite output");
  });

  json report = json::array();
  for (auto &j : jobs) {
    EnsureDirectory(j.out_dir);
    for (std::size_t z = 0; z < cfg.zones; ++z)
      WriteWav((j.out_dir / ("zone" + std::to_string(z + 1) + ".wav")).string(),
               Channel(j.zones, z));
    json meta = {{"input", j.input.string()},
                 {"variant", cfg.variant},
                 {"fingerprint", cfg.Fingerprint()},
                 {"zones", cfg.zones},
                 {"samples", j.y.NumSamples()},
                 {"frames", j.frames},
                 {"audio_seconds", j.y.Duration()},
                 {"processing_seconds", j.seconds},
                 {"rtf", j.seconds / j.y.Duration()},
                 {"mvdr",
                  {{"lambda", sep.mvdr.forgetting},
                   {"loading", sep.mvdr.loading},
                   {"recompute_every", sep.mvdr.recompute_every},
                   {"numerical_errors", j.stats.numerical_errors},
                   {"passthroughs", j.stats.passthroughs}}}};
    WriteText(j.out_dir / "metrics.json", meta.dump(2) + "\n");
    report.push_back(meta);
    std::cerr << j.input.string() << " -> " << j.out_dir.string() << " (" << cfg.zones
              << " zones, RTF " << meta["rtf"].get<double>() << ")\n";
  }
  std::cout << report.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- simulate

void WriteScene(const fs::path &dir, const Scene &scene, const json &meta) {
  EnsureDirectory(dir);
  WriteWav((dir / "mixture.wav").string(), scene.mixture);
  WriteWav((dir / "labels.wav").string(), scene.speech_labels);
  WriteWav((dir / "noise.wav").string(), scene.noise);
  WriteText(dir / "scene.json", meta.dump(2) + "\n");
}

json SceneMeta(const SceneManifest &m, const Scene &s) {
  json speakers = json::array();
  for (const auto &sp : m.speakers) speakers.push_back({{"zone", sp.zone + 1}, {"gain", sp.gain}});
  json meta = {{"sample_rate", m.sample_rate},
               {"zones", m.zones},
               {"samples", s.mixture.NumSamples()},
               {"seed", m.seed},
               {"speakers", speakers}};
  if (m.background) meta["background_snr_db"] = m.background->snr_db;
  json tr = json::array();
  for (const auto &t : m.transients) tr.push_back({{"onset", t.onset}, {"snr_db", t.snr_db}});
  meta["transients"] = tr;
  return meta;
}

struct SimulateOptions {
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::size_t count = 1;
  std::string strategy = "simulated";
  double seconds = 3.0;
  std::size_t max_speakers = 4;
  double transient_probability = 0.3;
  std::vector<std::string> recorded_irs;
};

int CmdSimulate(const SimulateOptions &o, const std::string &out_dir) {
  if (!o.manifest.empty()) {
    const SceneManifest m = LoadManifest(o.manifest);
    const Scene s = MixScene(m);
    if (!AllFinite(s.mixture)) throw NumericalError("non-finite mixture");
    const json meta = SceneMeta(m, s);
    WriteScene(out_dir, s, meta);
    std::cout << meta.dump(2) << "\n";
    std::cerr << "scene written to " << out_dir << "\n";
    return kOk;
  }
  if (!o.seed) throw InvalidConfig("--seed is required when sampling scenes");
  SamplerConfig cfg;
  cfg.seconds = o.seconds;
  cfg.max_speakers = o.max_speakers;
  cfg.transient_probability = o.transient_probability;
  cfg.strategy = ParseIrStrategy(o.strategy);
  cfg.Validate();

  // Recorded IRs: files with a sidecar naming their zone; grouped by zone.
  IrSet recorded;
  for (const auto &path : o.recorded_irs) {
    ImpulseResponse ir = ReadImpulseResponse(path);
    if (!ir.zone) throw InvalidInput(path + ": sidecar lacks a zone");
    auto it = std::find_if(recorded.begin(), recorded.end(),
                           [&](const IrBundle &b) { return b.source_zone == *ir.zone; });
    if (it == recorded.end()) {
      recorded.push_back({*ir.zone, {}});
      it = recorded.end() - 1;
    }
    it->per_mic.push_back(std::move(ir));
  }
  for (const auto &b : recorded)
    if (b.per_mic.size() != cfg.zones)
      throw InvalidInput("recorded IRs for zone " + std::to_string(b.source_zone + 1) +
                         " do not cover every microphone");
  if (cfg.strategy != IrStrategy::kSimulated && recorded.empty())
    throw InvalidConfig("strategy '" + o.strategy + "' needs --recorded-ir files");

  Rng rng(*o.seed);
  std::vector<SceneManifest> manifests;
  for (std::size_t i = 0; i < o.count; ++i) manifests.push_back(SampleScene(rng, cfg, {}, recorded));
  std::vector<Scene> scenes(o.count);
  ParallelFor(o.count, [&](std::size_t i) {
    scenes[i] = MixScene(manifests[i]);
    if (!AllFinite(scenes[i].mixture)) throw NumericalError("non-finite mixture");
  });
  json report = json::array();
  for (std::size_t i = 0; i < o.count; ++i) {
    json meta = SceneMeta(manifests[i], scenes[i]);
    meta["strategy"] = o.strategy;
    const fs::path dir = fs::path(out_dir) / ("scene" + std::to_string(i));
    WriteScene(dir, scenes[i], meta);
    report.push_back(meta);
  }
  std::cout << report.dump(2) << "\n";
  std::cerr << o.count << " scene(s) written to " << out_dir << "\n";
  return kOk;
}

// ---------------------------------------------------------------------- ir

struct IrOptions {
  std::string kind = "ess";
  double duration = 2.0, f_start = 10.0, f_end = 8000.0;
  int mls_order = 14;
  std::size_t tsp_length = 16384, tsp_stretch = 4096, periods = 2;
  std::string recording;
  std::size_t channel = 0;
  std::size_t length = 2048;
  std::string source;
  double beta = 0.7;
  int order = 10;
  std::optional<std::size_t> zone;
  bool nearest = false;

  ExcitationSpec Spec() const {
    ExcitationSpec s;
    s.kind = ParseExcitationKind(kind);
    s.duration = duration;
    s.f_start = f_start;
    s.f_end = f_end;
    s.mls_order = mls_order;
    s.tsp_length = tsp_length;
    s.tsp_stretch = tsp_stretch;
    s.periods = periods;
    s.Validate();
    return s;
  }
};

int CmdIrGen(const IrOptions &o, const std::string &out) {
  const ExcitationSpec spec = o.Spec();
  const Signal x = GenerateExcitation(spec);
  WriteWav(out, MultichannelWaveform::Mono(x, spec.sample_rate));
  json meta = {{"kind", ToString(spec.kind)},
               {"samples", x.size()},
               {"period", spec.PeriodLength()},
               {"output", out}};
  std::cout << meta.dump(2) << "\n";
  std::cerr << ToString(spec.kind) << " excitation, " << x.size() << " samples -> " << out << "\n";
  return kOk;
}

int CmdIrExtract(const IrOptions &o, const std::string &out) {
  const ExcitationSpec spec = o.Spec();
  const MultichannelWaveform rec = ReadWav(o.recording);
  if (rec.sample_rate != spec.sample_rate) throw InvalidInput("recording must be 16 kHz");
  if (o.channel >= rec.NumChannels()) throw InvalidInput("--channel out of range");
  ImpulseResponse ir = ExtractIr(rec.channels[o.channel], spec, o.length);
  if (o.zone) {
    if (*o.zone < 1) throw InvalidInput("zones are 1-based");
    ir.zone = *o.zone - 1;
  }
  ir.Validate();
  WriteImpulseResponse(out, ir);
  json meta = {{"kind", ToString(spec.kind)}, {"taps", ir.taps.size()}, {"output", out}};
  std::cout << meta.dump(2) << "\n";
  std::cerr << "IR of " << ir.taps.size() << " taps -> " << out << "\n";
  return kOk;
}

int CmdIrIsm(const IrOptions &o, const std::string &out_dir) {
  if (o.source.empty()) throw InvalidInput("--source x,y,z is required");
  RoomSpec room = CabinLayout::Room(ParseVec3(o.source), o.beta);
  room.max_order = o.order;
  room.ir_length = o.length;
  if (o.nearest) room.delay = FractionalDelay::kNearestSample;
  room.Validate();
  auto irs = SimulateIsmAll(room);
  if (o.zone) {
    if (*o.zone < 1 || *o.zone > CabinLayout::kZones) throw InvalidInput("zone out of range");
    for (auto &ir : irs) ir.zone = *o.zone - 1;
  }
  EnsureDirectory(out_dir);
  json files = json::array();
  for (std::size_t m = 0; m < irs.size(); ++m) {
    const fs::path p = fs::path(out_dir) / ("mic" + std::to_string(m + 1) + ".wav");
    WriteImpulseResponse(p.string(), irs[m]);
    files.push_back(p.string());
  }
  json meta = {{"source", Vec3Json(room.source)},
               {"beta", o.beta},
               {"order", o.order},
               {"length", o.length},
               {"files", files}};
  std::cout << meta.dump(2) << "\n";
  std::cerr << irs.size() << " IRs written to " << out_dir << "\n";
  return kOk;
}

// -------------------------------------------------------------------- eval

struct EvalOptions {
  std::string estimates, labels;
  std::optional<std::size_t> true_zone;
  bool non_standard = false;
  bool oracle = false;
  std::optional<std::uint64_t> seed;
  std::size_t scenes = 20;
  double snr_db = 5.0;
};

int CmdEval(const EvalOptions &o) {
  if (o.oracle) {
    if (!o.seed) throw InvalidConfig("--seed is required for the oracle experiment");
    std::vector<OracleRun> gains_runs(o.scenes), pos_runs(o.scenes), boundary_runs(o.scenes);
    OracleSceneConfig two;
    two.background_snr_db = o.snr_db;
    ParallelFor(3 * o.scenes, [&](std::size_t k) {
      const std::size_t i = k % o.scenes;
      const std::uint64_t seed = *o.seed + i;
      OracleSceneConfig c = two;
      if (k < o.scenes) {
        gains_runs[i] = RunOracle(seed, c);
      } else if (k < 2 * o.scenes) {
        c.speaker_zones = {i % CabinLayout::kZones};
        pos_runs[i] = RunOracle(seed + 1000003, c);
      } else {
        c.speaker_zones = {0};
        c.position = CabinLayout::FrontBoundary();
        boundary_runs[i] = RunOracle(seed + 2000003, c);
      }
    });
    json gains = json::array();
    std::vector<double> g;
    for (std::size_t i = 0; i < o.scenes; ++i)
      for (const auto &z : OracleGains(gains_runs[i])) {
        gains.push_back({{"scene", i},
                         {"zone", z.zone + 1},
                         {"mixture_si_snr", z.mixture_si_snr},
                         {"output_si_snr", z.output_si_snr},
                         {"gain", z.gain()}});
        g.push_back(z.gain());
      }
    std::vector<PositioningEntry> entries;
    for (std::size_t i = 0; i < o.scenes; ++i) {
      entries.push_back(ZonePositioning(pos_runs[i].post_masked.channels, i % CabinLayout::kZones));
      entries.push_back(ZonePositioning(boundary_runs[i].post_masked.channels, 0, true));
    }
    const PositioningReport rep = Summarize(entries);
    json report = {{"scenes", o.scenes},
                   {"background_snr_db", o.snr_db},
                   {"median_si_snr_gain", Median(g)},
                   {"gains", gains},
                   {"positioning",
                    {{"decided", rep.decided},
                     {"undecided", rep.undecided},
                     {"correct", rep.correct},
                     {"accuracy", rep.accuracy()},
                     {"nspa", rep.nspa() ? json(*rep.nspa()) : json(nullptr)}}}};
    std::cout << report.dump(2) << "\n";
    std::cerr << "median SI-SNR gain " << Median(g) << " dB, positioning accuracy "
              << rep.accuracy() << "\n";
    return kOk;
  }

  if (o.estimates.empty() || o.labels.empty())
    throw InvalidInput("--estimates and --labels are required (or --oracle)");
  const MultichannelWaveform est = ReadWav(o.estimates);
  const MultichannelWaveform lab = ReadWav(o.labels);
  if (est.NumChannels() != lab.NumChannels() || est.NumSamples() != lab.NumSamples())
    throw InvalidInput("estimates and labels differ in shape");
  if (est.sample_rate != lab.sample_rate) throw InvalidInput("sample rates differ");
  json zones = json::array();
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t z = 0; z < est.NumChannels(); ++z) {
    if (Power(lab.channels[z]) == 0.0) {
      zones.push_back({{"zone", z + 1}, {"si_snr", nullptr}});
      continue;
    }
    const double s = SiSnr(est.channels[z], lab.channels[z]);
    zones.push_back({{"zone", z + 1},
                     {"si_snr", s},
                     {"fbank_mae", FbankMae(est.channels[z], lab.channels[z])}});
    sum += s;
    ++scored;
  }
  json report = {{"zones", zones}, {"mean_si_snr", scored ? json(sum / scored) : json(nullptr)}};
  if (o.true_zone) {
    if (*o.true_zone < 1 || *o.true_zone > est.NumChannels())
      throw InvalidInput("--true-zone out of range");
    const auto e = ZonePositioning(est.channels, *o.true_zone - 1, o.non_standard);
    report["positioning"] = {{"true_zone", *o.true_zone},
                             {"predicted", e.predicted ? json(*e.predicted + 1) : json(nullptr)},
                             {"correct", e.correct()},
                             {"non_standard", o.non_standard}};
  }
  std::cout << report.dump(2) << "\n";
  std::cerr << "scored " << scored << " zone(s)\n";
  return kOk;
}

// ------------------------------------------------------------------- bench

int CmdBench(const ModelOptions &o, const std::vector<std::string> &variants,
             double seconds, std::size_t runs) {
  if (!(seconds > 0.0)) throw InvalidConfig("--seconds must be positive");
  if (o.weights_path.empty() && !o.seed)
    throw InvalidConfig("--seed is required for random weights");
  json report = json::array();
  for (const auto &v : variants) {
    ModelOptions mo = o;
    mo.variant = v;
    const ModelConfig cfg = variants.size() == 1 ? mo.Config() : ModelConfig::Preset(v);
    cfg.Validate();
    const ModelWeights w = o.weights_path.empty() ? InitRandom(cfg, *o.seed) : LoadWeights(o.weights_path);
    ValidateWeights(w, cfg);
    const Network net(cfg, w);
    const SeparatorConfig sep = o.Separator();
    Rng rng(o.seed.value_or(0));
    const auto n = static_cast<std::size_t>(std::llround(seconds * 16000));
    MultichannelWaveform y(cfg.zones, n);
    for (auto &ch : y.channels)
      for (auto &x : ch) x = 0.1 * Gaussian(rng);
    const RtfResult rtf = MeasureRtf([&] { Separate(net, y, sep); }, seconds, runs);
    const MacReport macs = CountMacs(cfg, 1.0);
    report.push_back({{"variant", cfg.variant},
                      {"audio_seconds", seconds},
                      {"rtf_median", rtf.median},
                      {"rtf_min", rtf.min},
                      {"rtf_max", rtf.max},
                      {"runs", rtf.runs},
                      {"gmacs_per_second", macs.gmacs_per_second()},
                      {"parameters", CountParameters(cfg)}});
    std::cerr << cfg.variant << ": RTF " << rtf.median << " (single thread), "
              << macs.gmacs_per_second() << " GMACs/s, " << CountParameters(cfg)
              << " parameters\n";
  }
  std::cout << report.dump(2) << "\n";
  return kOk;
}

// ------------------------------------------------------------ init-weights

int CmdInitWeights(const ModelOptions &o, const std::string &out) {
  if (!o.seed) throw InvalidConfig("--seed is required");
  const ModelConfig cfg = o.Config();
  cfg.Validate();
  const ModelWeights w = InitRandom(cfg, *o.seed);
  SaveWeights(out, w);
  json meta = {{"variant", cfg.variant},
               {"fingerprint", cfg.Fingerprint()},
               {"seed", *o.seed},
               {"parameters", w.NumParameters()},
               {"output", out}};
  std::cout << meta.dump(2) << "\n";
  std::cerr << w.NumParameters() << " parameters -> " << out << "\n";
  return kOk;
}

int Run(int argc, char **argv) {
  CLI::App app{"In-car multi-zone speech separation"};
  app.require_subcommand(1);
  ModelOptions mo;

  std::vector<std::string> inputs;
  std::string out_dir, out_file;
  auto *sep = app.add_subcommand("separate", "separate Z-channel recordings into zone WAVs");
  AddModelFlags(sep, mo);
  AddMvdrFlags(sep, mo);
  sep->add_option("--chunk-seconds", mo.chunk_seconds, "streaming input block length");
  sep->add_option("-o,--out", out_dir, "output directory")->required();
  sep->add_option("inputs", inputs, "Z-channel 16 kHz WAV files")->required()->check(CLI::ExistingFile);

  SimulateOptions so;
  auto *sim = app.add_subcommand("simulate", "render scenes from a manifest or by sampling");
  sim->add_option("--manifest", so.manifest, "scene manifest (JSON)")->check(CLI::ExistingFile);
  sim->add_option("--seed", so.seed, "sampler seed");
  sim->add_option("--count", so.count, "number of sampled scenes");
  sim->add_option("--seconds", so.seconds, "scene length");
  sim->add_option("--max-speakers", so.max_speakers, "upper bound on talkers per scene");
  sim->add_option("--transient-probability", so.transient_probability);
  sim->add_option("--strategy", so.strategy, "IR mixing strategy")
      ->check(CLI::IsMember({"mixed", "added", "only", "simulated"}));
  sim->add_option("--recorded-ir", so.recorded_irs, "recorded IR files with zone sidecars")
      ->check(CLI::ExistingFile);
  sim->add_option("-o,--out", out_dir, "output directory")->required();

  IrOptions io;
  auto *ir = app.add_subcommand("ir", "impulse-response tools");
  ir->require_subcommand(1);
  auto excitation_flags = [&io](CLI::App *c) {
    c->add_option("--kind", io.kind, "excitation")->check(CLI::IsMember({"ess", "mls", "tsp"}));
    c->add_option("--duration", io.duration, "sweep length in seconds");
    c->add_option("--f-start", io.f_start);
    c->add_option("--f-end", io.f_end);
    c->add_option("--mls-order", io.mls_order);
    c->add_option("--tsp-length", io.tsp_length);
    c->add_option("--tsp-stretch", io.tsp_stretch);
    c->add_option("--periods", io.periods);
  };
  auto *gen = ir->add_subcommand("gen", "write an excitation signal");
  excitation_flags(gen);
  gen->add_option("-o,--out", out_file, "output WAV")->required();
  auto *ext = ir->add_subcommand("extract", "deconvolve a recorded excitation");
  excitation_flags(ext);
  ext->add_option("--recording", io.recording)->required()->check(CLI::ExistingFile);
  ext->add_option("--channel", io.channel, "0-based channel of the recording");
  ext->add_option("--length", io.length, "IR taps");
  ext->add_option("--zone", io.zone, "1-based zone stored in the sidecar");
  ext->add_option("-o,--out", out_file, "output IR WAV")->required();
  auto *ism = ir->add_subcommand("ism", "image-source IRs in the cabin preset");
  ism->add_option("--source", io.source, "x,y,z in metres")->required();
  ism->add_option("--beta", io.beta, "wall reflection coefficient");
  ism->add_option("--order", io.order, "maximum image order");
  ism->add_option("--length", io.length, "IR taps");
  ism->add_option("--zone", io.zone, "1-based zone stored in the sidecars");
  ism->add_flag("--nearest", io.nearest, "round delays to whole samples");
  ism->add_option("-o,--out", out_dir, "output directory")->required();

  EvalOptions eo;
  auto *ev = app.add_subcommand("eval", "score separated outputs against labels");
  ev->add_option("--estimates", eo.estimates)->check(CLI::ExistingFile);
  ev->add_option("--labels", eo.labels)->check(CLI::ExistingFile);
  ev->add_option("--true-zone", eo.true_zone, "1-based zone of a single talker");
  ev->add_flag("--non-standard", eo.non_standard, "talker sits between zones");
  ev->add_flag("--oracle", eo.oracle, "run the ideal-mask experiment instead");
  ev->add_option("--seed", eo.seed);
  ev->add_option("--scenes", eo.scenes);
  ev->add_option("--snr", eo.snr_db, "background SNR of the oracle scenes");

  std::vector<std::string> variants{"S", "M", "L"};
  double bench_seconds = 10.0;
  std::size_t runs = 5;
  auto *bench = app.add_subcommand("bench", "single-thread RTF and MAC report");
  AddModelFlags(bench, mo);
  AddMvdrFlags(bench, mo);
  bench->add_option("--seed", mo.seed, "seed for random weights");
  bench->add_option("--variants", variants, "variants to time")
      ->check(CLI::IsMember({"S", "M", "L"}));
  bench->add_option("--seconds", bench_seconds, "audio length");
  bench->add_option("--runs", runs, "timed runs after one warm-up (>= 5)");

  auto *init = app.add_subcommand("init-weights", "write seeded random weights");
  AddModelFlags(init, mo);
  init->add_option("--seed", mo.seed, "initialization seed");
  init->add_option("-o,--out", out_file, "weight container")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*sep) return CmdSeparate(mo, inputs, out_dir);
    if (*sim) return CmdSimulate(so, out_dir);
    if (*gen) return CmdIrGen(io, out_file);
    if (*ext) return CmdIrExtract(io, out_file);
    if (*ism) return CmdIrIsm(io, out_dir);
    if (*ev) return CmdEval(eo);
    if (*bench) {
      if (bench->count("--variant") || bench->count("--config")) variants = {mo.variant};
      return CmdBench(mo, variants, bench_seconds, runs);
    }
    if (*init) return CmdInitWeights(mo, out_file);
  } catch (const InvalidInput &e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidManifest &e) {
    std::cerr << "manifest error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidConfig &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const WeightShapeError &e) {
    std::cerr << "weights error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace
}  // namespace cabinsep

int main(int argc, char **argv) { return cabinsep::Run(argc, argv); }
