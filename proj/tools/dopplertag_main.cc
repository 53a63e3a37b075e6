// Copyright 2026 The Dopplertag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dopplertag command line: simulate, analyze, session, tables, experiment.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dopplertag/errors.h"
#include "dopplertag/harness.h"
#include "dopplertag/receiver_dsp.h"
#include "dopplertag/scene_io.h"
#include "dopplertag/scene_sim.h"
#include "dopplertag/wav.h"

namespace {

namespace dt = dopplertag;
using nlohmann::json;

enum ExitCode {
  kOk = 0,
  kFailure = 1,       // usage or unexpected error
  kParse = 2,         // malformed scene, flag value or input file
  kSimulation = 3,    // scene/plan cannot be simulated
  kDetection = 4,     // no tone in an analyzed recording
  kTableMismatch = 5, // table deviates by more than 0.1 deg
  kIo = 6,
};

struct Common {
  std::string scene;
  std::uint64_t seed = 0;
  double snr_db = 10.0;
  std::string noise = "ambient";
  int k_rows = 0;  // 0 = estimate
  std::string out;
  std::string format = "text";
};

dt::sim::ChannelParams Channel(const Common& c) {
  dt::sim::ChannelParams ch;
  ch.noise = dt::sim::NoiseKindFromString(c.noise);
  ch.target_snr_db = c.snr_db;
  return ch;
}

// Writes to --out when given, stdout otherwise.
void Emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw dt::IoError("cannot write '" + c.out + "'");
  f << text;
}

std::string Fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

int Simulate(const Common& c) {
  if (c.scene.empty()) throw dt::ParseError("--scene is required");
  if (c.out.empty()) throw dt::ParseError("--out DIR is required for simulate");
  const auto file = dt::sim::LoadSceneFile(c.scene);
  const auto session = dt::sim::SimulateSession(file.scene, file.plan, Channel(c), c.seed);
  std::filesystem::create_directories(c.out);
  json manifest = {{"seed", c.seed}, {"ground_truth", dt::ToJson(session.ground_truth)}};
  json sweeps = json::array();
  for (const auto& sweep : session.sweeps) {
    const std::string id(dt::ToString(sweep.placement.id));
    json files = json::array();
    for (const auto& rec : sweep.recordings) {
      const std::string name = rec.receiver_name + "_" + id + ".wav";
      dt::WriteWavPcm16((std::filesystem::path(c.out) / name).string(), rec.samples,
                        static_cast<int>(std::lround(rec.nominal_rate)));
      files.push_back({{"receiver", rec.receiver_name}, {"file", name},
                       {"true_rate", rec.true_rate}});
    }
    const double v = dt::geometry::IntegrateVelocity(sweep.trace.accel_readings, 0.0,
                                                     sweep.trace.accel_dt).peak;
    sweeps.push_back({{"sweep", id}, {"v_peak_true", sweep.trace.v_peak},
                      {"v_peak_measured", v}, {"accel_readings", sweep.trace.accel_readings},
                      {"recordings", files}});
  }
  manifest["sweeps"] = sweeps;
  std::ofstream m(std::filesystem::path(c.out) / "session.json");
  if (!m) throw dt::IoError("cannot write session.json in '" + c.out + "'");
  m << manifest.dump(2) << "\n";
  std::cout << "wrote " << session.sweeps.size() << " sweep(s) to " << c.out << "\n";
  return kOk;
}

int Analyze(const Common& c, const std::vector<std::string>& wavs) {
  if (wavs.empty()) throw dt::ParseError("analyze needs at least one WAV file");
  std::vector<dt::dsp::ShiftEstimate> out;
  for (const auto& path : wavs) {
    const dt::WavData wav = dt::ReadWavPcm16(path);
    const std::string name = std::filesystem::path(path).stem().string();
    out.push_back(dt::dsp::ProcessRecording(wav.samples, wav.sample_rate, {}, name));
  }
  std::ostringstream s;
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& e : out) arr.push_back(dt::dsp::ToJson(e));
    s << (arr.size() == 1 ? arr[0] : arr).dump(2) << "\n";
  } else if (c.format == "csv") {
    s << "name,f0_local,delta_f,coarse_delta_f,detected,degraded,peak_frame_index\n";
    for (const auto& e : out) {
      s << e.name << ',' << Fixed(e.f0_local, 3) << ',' << Fixed(e.delta_f, 3) << ','
        << Fixed(e.coarse_delta_f, 3) << ',' << e.detected << ',' << e.degraded << ','
        << e.peak_frame_index << "\n";
    }
  } else {
    for (const auto& e : out) {
      s << e.name << ": delta_f " << Fixed(e.delta_f, 2) << " Hz (coarse "
        << Fixed(e.coarse_delta_f, 2) << ", reference " << Fixed(e.f0_local, 2) << " Hz"
        << (e.degraded ? ", degraded" : "") << ")\n";
    }
  }
  Emit(c, s.str());
  return kOk;
}

int Session(const Common& c) {
  if (c.scene.empty()) throw dt::ParseError("--scene is required");
  const auto file = dt::sim::LoadSceneFile(c.scene);
  dt::harness::SessionOptions opt;
  opt.channel = Channel(c);
  if (c.k_rows > 0) opt.k_rows = c.k_rows;
  const auto r = dt::harness::RunSession(file.scene, file.plan, opt, c.seed);
  std::ostringstream s;
  if (c.format == "json") {
    s << dt::harness::ToJson(r).dump(2) << "\n";
  } else if (c.format == "csv") {
    s << "row,position,name,alpha_deg\n";
    for (std::size_t i = 0; i < r.layout.rows.size(); ++i) {
      for (std::size_t j = 0; j < r.layout.rows[i].size(); ++j) {
        const auto& n = r.layout.rows[i][j];
        const auto it = r.layout.angles.find(n);
        s << i + 1 << ',' << j + 1 << ',' << n << ','
          << (it == r.layout.angles.end() ? "" : Fixed(dt::geometry::RadToDeg(it->second), 2))
          << "\n";
      }
    }
    for (const auto& [n, why] : r.layout.excluded) s << ",," << n << "," << dt::ToString(why) << "\n";
  } else {
    s << dt::RenderCaption(r.layout) << "\n";
    s << "ground truth: " << dt::RenderCaption(r.truth) << "\n";
    s << "matched: " << (r.matched ? "yes" : "no") << "\n";
    for (const auto& w : r.layout.warnings) s << "warning: " << w << "\n";
  }
  Emit(c, s.str());
  return kOk;
}

int Tables(const Common& c, const std::string& which) {
  std::vector<std::string> ids;
  if (which == "all") {
    ids = {"I", "II", "III"};
  } else {
    ids = {which};
  }
  bool pass = true;
  std::ostringstream s;
  json arr = json::array();
  if (c.format == "csv") s << "table,row,column,computed,published,deviation\n";
  for (const auto& id : ids) {
    const auto t = dt::harness::ReproduceTable(id);
    pass = pass && t.Passes();
    if (c.format == "json") {
      arr.push_back(dt::harness::ToJson(t));
    } else if (c.format == "csv") {
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.computed.size(); ++i) {
          s << t.id << ',' << r.label << ',' << t.columns[i] << ',' << Fixed(r.computed[i], 4)
            << ',' << r.published[i] << ',' << Fixed(std::abs(r.computed[i] - r.published[i]), 4) << "\n";
        }
      }
    } else {
      dt::harness::PrintTable(t, s);
      s << "\n";
    }
  }
  if (c.format == "json") s << (arr.size() == 1 ? arr[0] : arr).dump(2) << "\n";
  Emit(c, s.str());
  return pass ? kOk : kTableMismatch;
}

template <typename T>
std::vector<T> ParseList(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v;
    if (!(is >> v) || !is.eof()) {
      throw dt::ParseError(std::string(flag) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw dt::ParseError(std::string(flag) + ": empty list");
  return out;
}

struct ExperimentFlags {
  std::string distances = "3,5,10";
  std::string receivers = "6";
  std::string rows = "1";
  std::string noises;   // defaults to --noise
  std::string snrs;     // defaults to --snr-db
  int repetitions = 20;
};

int Experiment(const Common& c, const ExperimentFlags& f) {
  if (c.out.empty()) throw dt::ParseError("--out FILE.csv is required for experiment");
  std::vector<dt::sim::ChannelParams> channels;
  std::vector<std::string> noises;
  {
    std::stringstream ss(f.noises.empty() ? c.noise : f.noises);
    std::string item;
    while (std::getline(ss, item, ',')) noises.push_back(item);
  }
  const auto snrs = f.snrs.empty() ? std::vector<double>{c.snr_db}
                                   : ParseList<double>(f.snrs, "--snrs");
  for (const auto& n : noises) {
    const auto kind = dt::sim::NoiseKindFromString(n);
    if (kind == dt::sim::NoiseKind::kNone) {
      channels.push_back(dt::sim::ChannelParams::Quiet());
      continue;
    }
    for (double snr : snrs) {
      dt::sim::ChannelParams ch;
      ch.noise = kind;
      ch.target_snr_db = snr;
      channels.push_back(ch);
    }
  }
  dt::harness::ExperimentSpec spec;
  if (!c.scene.empty()) {
    const auto file = dt::sim::LoadSceneFile(c.scene);
    spec.repetitions = f.repetitions;
    spec.seed_base = c.seed;
    for (const auto& ch : channels) {
      dt::harness::ExperimentCell cell;
      cell.scene = file.scene;
      cell.plan = file.plan;
      cell.channel = ch;
      cell.label = std::filesystem::path(c.scene).stem().string() + " " +
                   std::string(dt::sim::ToString(ch.noise));
      spec.cells.push_back(std::move(cell));
    }
  } else {
    spec = dt::harness::GridSpec(ParseList<double>(f.distances, "--distances"),
                                 ParseList<int>(f.receivers, "--receivers"),
                                 ParseList<int>(f.rows, "--rows"), channels, f.repetitions,
                                 c.seed);
  }
  if (c.k_rows > 0) spec.options.k_rows = c.k_rows;
  const auto rows = dt::harness::RunExperiment(spec);
  dt::harness::WriteCsvFile(rows, c.out);
  for (const auto& r : rows) {
    if (!r.aggregate) continue;
    std::cout << r.label << ": accuracy " << Fixed(r.Accuracy(), 2) << " (" << r.matched << "/"
              << r.sessions << "), recall " << Fixed(r.counts.Recall(), 2) << ", fallout "
              << Fixed(r.counts.Fallout(), 2) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doppler-shift photo tagging: simulator, receiver pipeline and harness"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&c](CLI::App* sub, bool scene) {
    if (scene) sub->add_option("--scene", c.scene, "Scene JSON file");
    sub->add_option("--seed", c.seed, "Base seed");
    sub->add_option("--snr-db", c.snr_db, "In-band SNR at the 3 m reference")->capture_default_str();
    sub->add_option("--noise", c.noise, "none|ambient|music|conversation")->capture_default_str();
    sub->add_option("--k-rows", c.k_rows, "Row count (0 = estimate)");
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
  };

  auto* simulate = app.add_subcommand("simulate", "Render WAV recordings for a scene");
  add_common(simulate, true);

  std::vector<std::string> wavs;
  auto* analyze = app.add_subcommand("analyze", "Estimate the Doppler shift in WAV recordings");
  add_common(analyze, false);
  analyze->add_option("wav", wavs, "PCM16 mono WAV files")->required();

  auto* session = app.add_subcommand("session", "Simulate and tag one photo session");
  add_common(session, true);

  std::string which = "all";
  auto* tables = app.add_subcommand("tables", "Reproduce the angular tables");
  add_common(tables, false);
  tables->add_option("table", which, "I, II, III or all")
      ->check(CLI::IsMember({"I", "II", "III", "all"}));

  ExperimentFlags ef;
  auto* experiment = app.add_subcommand("experiment", "Repeated sessions over a grid, as CSV");
  add_common(experiment, true);
  experiment->add_option("--distances", ef.distances, "Comma-separated meters")->capture_default_str();
  experiment->add_option("--receivers", ef.receivers, "Comma-separated counts")->capture_default_str();
  experiment->add_option("--rows", ef.rows, "Comma-separated row counts")->capture_default_str();
  experiment->add_option("--noises", ef.noises, "Comma-separated noise kinds");
  experiment->add_option("--snrs", ef.snrs, "Comma-separated SNRs in dB");
  experiment->add_option("--reps", ef.repetitions, "Repetitions per cell")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*simulate) return Simulate(c);
    if (*analyze) return Analyze(c, wavs);
    if (*session) return Session(c);
    if (*tables) return Tables(c, which);
    if (*experiment) return Experiment(c, ef);
  } catch (const dt::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const dt::ToneNotDetected& e) {
    std::cerr << "detection failed: " << e.what() << "\n";
    return kDetection;
  } catch (const dt::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const dt::ConfigError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kSimulation;
  } catch (const dt::PreconditionError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kSimulation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
