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

#include "dopplertag/harness.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dopplertag/errors.h"
#include "dopplertag/geometry.h"

namespace dopplertag::harness {

// ---- Metrics ----

Confusion& Confusion::operator+=(const Confusion& o) {
  inside += o.inside;
  outside += o.outside;
  tagged += o.tagged;
  inside_tagged += o.inside_tagged;
  outside_tagged += o.outside_tagged;
  return *this;
}

double Confusion::Precision() const {
  return tagged == 0 ? 1.0 : static_cast<double>(inside_tagged) / tagged;
}
double Confusion::Recall() const {
  return inside == 0 ? 1.0 : static_cast<double>(inside_tagged) / inside;
}
double Confusion::Fallout() const {
  return outside == 0 ? 0.0 : static_cast<double>(outside_tagged) / outside;
}

Confusion CountInclusion(const TagLayout& layout, const TagLayout& truth) {
  Confusion c;
  const auto placed = layout.PlacedNames();
  const std::set<std::string> tagged(placed.begin(), placed.end());
  const auto inside = truth.PlacedNames();
  c.inside = static_cast<int>(inside.size());
  c.outside = static_cast<int>(truth.excluded.size());
  c.tagged = static_cast<int>(tagged.size());
  for (const auto& n : inside) c.inside_tagged += tagged.count(n) ? 1 : 0;
  for (const auto& [n, why] : truth.excluded) c.outside_tagged += tagged.count(n) ? 1 : 0;
  return c;
}

int CorrectPositions(const TagLayout& layout, const TagLayout& truth) {
  int correct = 0;
  for (std::size_t r = 0; r < truth.rows.size(); ++r) {
    for (std::size_t i = 0; i < truth.rows[r].size(); ++i) {
      if (r < layout.rows.size() && i < layout.rows[r].size() &&
          layout.rows[r][i] == truth.rows[r][i]) {
        ++correct;
      }
    }
  }
  return correct;
}

MetricsReport ComputeMetrics(std::span<const TagLayout> layouts,
                             std::span<const TagLayout> truths) {
  if (layouts.size() != truths.size()) {
    throw PreconditionError("compute_metrics: layouts and truths differ in length");
  }
  MetricsReport m;
  int positions = 0, correct = 0;
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    ++m.sessions;
    if (SameLayout(layouts[i], truths[i])) ++m.matched;
    m.counts += CountInclusion(layouts[i], truths[i]);
    positions += static_cast<int>(truths[i].PlacedNames().size());
    correct += CorrectPositions(layouts[i], truths[i]);
  }
  m.accuracy = m.sessions ? static_cast<double>(m.matched) / m.sessions : 0.0;
  m.precision = m.counts.Precision();
  m.recall = m.counts.Recall();
  m.fallout = m.counts.Fallout();
  m.position_accuracy = positions ? static_cast<double>(correct) / positions : 1.0;
  return m;
}

// ---- Session ----

SessionResult RunSession(const sim::Scene& scene, const sim::SweepPlan& plan,
                         const SessionOptions& options, std::uint64_t seed) {
  const sim::SimulatedSession session =
      sim::SimulateSession(scene, plan, options.channel, seed, options.sweep);
  const std::vector<sim::Person> members = scene.Members();

  tag::SessionConfig config;
  config.fov = scene.fov;
  for (const auto& m : members) config.group_members.push_back(m.name);
  config.reply_timeout = options.reply_timeout;
  config.k_rows = options.k_rows;
  config.affinity_scale = options.affinity_scale;
  config.distance_l = session.geometry.distance_l;
  config.distance_w = session.geometry.distance_w;

  SessionResult result;
  result.truth = session.ground_truth;
  tag::MessageBus bus;
  std::vector<std::string> names;
  for (const auto& m : members) names.push_back(m.name);
  for (const auto& sweep : session.sweeps) {
    const SweepId id = sweep.placement.id;
    const double v = geometry::IntegrateVelocity(sweep.trace.accel_readings, 0.0,
                                                 sweep.trace.accel_dt).peak;
    if (id == SweepId::kA) {
      config.v_sender_a = v;
      result.v_sender_a = v;
    } else {
      config.v_sender_b = v;
      result.v_sender_b = v;
    }
    bus.Activate(id, names);
    for (const auto& rec : sweep.recordings) {
      tag::ReplyMessage reply;
      reply.name = rec.receiver_name;
      reply.sweep = id;
      try {
        const dsp::ShiftEstimate est =
            dsp::ProcessRecording(rec.samples, rec.nominal_rate, options.pipeline, rec.receiver_name);
        reply.delta_f = est.delta_f;
        reply.degraded = est.degraded;
        (id == SweepId::kA ? result.estimates_a : result.estimates_b).push_back(est);
      } catch (const ToneNotDetected&) {
        reply.detected = false;
      }
      bus.Send(reply);
    }
  }
  result.layout = tag::RunSender(bus, config);
  result.matched = SameLayout(result.layout, result.truth);
  return result;
}

nlohmann::json ToJson(const SessionResult& r) {
  nlohmann::json est_a = nlohmann::json::array(), est_b = nlohmann::json::array();
  for (const auto& e : r.estimates_a) est_a.push_back(dsp::ToJson(e));
  for (const auto& e : r.estimates_b) est_b.push_back(dsp::ToJson(e));
  nlohmann::json doc = {{"layout", ToJson(r.layout)},
                        {"ground_truth", ToJson(r.truth)},
                        {"matched", r.matched},
                        {"caption", RenderCaption(r.layout)},
                        {"v_sender_a", r.v_sender_a},
                        {"estimates_a", est_a}};
  if (r.v_sender_b) {
    doc["v_sender_b"] = *r.v_sender_b;
    doc["estimates_b"] = est_b;
  }
  return doc;
}

// ---- Tables ----

namespace {

constexpr double kGap = 0.095;
constexpr double kTableSpeed = 3.4;

TableReport ResolutionTable(std::string id, std::string title, double rate,
                            const std::vector<std::vector<double>>& published) {
  TableReport t;
  t.id = std::move(id);
  t.title = std::move(title);
  t.columns = {"alpha", "beta", "beta - alpha"};
  const geometry::ResolutionParams res{rate, 2048};
  for (const auto& row : published) {
    const double alpha = row[0];
    const double beta = geometry::RadToDeg(geometry::MinDistinguishableBeta(
        geometry::DegToRad(alpha), res, kTableSpeed, geometry::kDefaultSoundSpeed,
        geometry::kDefaultToneFrequency));
    TableRow r;
    std::ostringstream label;
    label << std::fixed << std::setprecision(1) << alpha;
    r.label = label.str();
    r.computed = {beta, beta - alpha};
    r.published = {row[1], row[2]};
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace

TableReport ReproduceTable(std::string_view which) {
  TableReport t;
  if (which == "I" || which == "1") {
    t.id = "I";
    t.title = "Angular error from the camera-speaker gap (deg), L = 0.095 m";
    const std::vector<double> alphas{0, 10, 20, 30, 40, 50, 60};
    for (double a : alphas) {
      std::ostringstream c;
      c << static_cast<int>(a) << " deg";
      t.columns.push_back(c.str());
    }
    const std::vector<std::pair<double, std::vector<double>>> published{
        {3.0, {1.8, 1.7, 1.5, 1.3, 1.0, 0.7, 0.4}},
        {5.0, {1.0, 1.0, 0.9, 0.8, 0.6, 0.4, 0.2}},
        {10.0, {0.5, 0.5, 0.4, 0.4, 0.3, 0.2, 0.1}}};
    for (const auto& [h, values] : published) {
      TableRow r;
      r.label = std::to_string(static_cast<int>(h)) + " m";
      for (double a : alphas) {
        const double rad = geometry::DegToRad(a);
        const double corrected = geometry::CameraCorrectedAngle(
            rad, kGap, h, geometry::AxisSide::kAwayFromSpeaker);
        r.computed.push_back(geometry::RadToDeg(std::abs(rad - corrected)));
      }
      r.published = values;
      t.rows.push_back(std::move(r));
    }
  } else if (which == "II" || which == "2") {
    t = ResolutionTable("II", "Angular resolution before undersampling (Fs = 44100 Hz)", 44100.0,
                        {{55, 62.1, 7.1}, {65, 71.6, 6.6}, {75, 81.3, 6.3}, {85, 91.2, 6.2},
                         {95, 101.2, 6.2}, {105, 111.5, 6.5}, {115, 122.1, 7.1},
                         {125, 133.0, 8.0}});
  } else if (which == "III" || which == "3") {
    t = ResolutionTable("III", "Angular resolution after undersampling (Fs = 6300 Hz)", 6300.0,
                        {{55, 56.1, 1.1}, {65, 65.9, 0.9}, {75, 75.9, 0.9}, {85, 85.8, 0.8},
                         {95, 95.8, 0.8}, {105, 105.9, 0.9}, {115, 115.9, 0.9},
                         {125, 126.0, 1.0}});
  } else {
    throw ParseError("unknown table '" + std::string(which) + "' (expected I, II or III)");
  }
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.computed.size(); ++i) {
      t.max_deviation = std::max(t.max_deviation, std::abs(r.computed[i] - r.published[i]));
    }
  }
  return t;
}

void PrintTable(const TableReport& t, std::ostream& out) {
  out << "Table " << t.id << ": " << t.title << "\n";
  out << std::setw(8) << "";
  for (const auto& c : t.columns) out << std::setw(18) << c;
  out << "\n";
  out << std::fixed;
  for (const auto& r : t.rows) {
    out << std::setw(8) << r.label;
    for (std::size_t i = 0; i < r.computed.size(); ++i) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << r.computed[i] << " (" << std::setprecision(1)
           << r.published[i] << ")";
      out << std::setw(18) << cell.str();
    }
    out << "\n";
  }
  out << "max deviation: " << std::setprecision(3) << t.max_deviation << " deg ("
      << (t.Passes() ? "within" : "exceeds") << " 0.1 deg)\n";
  out.unsetf(std::ios::floatfield);
}

nlohmann::json ToJson(const TableReport& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"label", r.label}, {"computed", r.computed}, {"published", r.published}});
  }
  return {{"table", t.id},        {"title", t.title},
          {"columns", t.columns}, {"rows", rows},
          {"max_deviation", t.max_deviation}, {"pass", t.Passes()}};
}

// ---- Scenes ----

namespace {

std::string PersonName(int i) {
  static const char* kNames[] = {"ann", "bob", "cy",  "dee", "eve", "fay",
                                 "gus", "hal", "ivy", "jo",  "kim", "lou"};
  if (i < 12) return kNames[i];
  return "p" + std::to_string(i + 1);
}

}  // namespace

sim::Scene SingleRowScene(int count, double distance, double spacing) {
  if (count < 1 || !(distance > 0.0)) throw ConfigError("single-row scene: bad size");
  sim::Scene s;
  s.camera_position = {0.0, distance};
  s.optical_axis = {0.0, -1.0};
  for (int j = 0; j < count; ++j) {
    // Camera-left is +x, so the first name is the leftmost in the picture.
    const double x = ((count - 1) / 2.0 - j) * spacing;
    s.receivers.push_back({PersonName(j), {x, 0.0}});
  }
  return s;
}

sim::SceneFile MultiRowScene(int rows, int per_row, double distance_l,
                             double distance_w, double row_gap, double spacing) {
  if (rows < 1 || per_row < 1) throw ConfigError("multi-row scene: bad size");
  sim::SceneFile f;
  f.scene.camera_position = {0.0, distance_l};
  f.scene.optical_axis = {0.0, -1.0};
  std::vector<int> labels;
  int k = 0;
  for (int r = 0; r < rows; ++r) {
    const double y = ((rows - 1) / 2.0 - r) * row_gap;
    for (int j = 0; j < per_row; ++j) {
      const double x = ((per_row - 1) / 2.0 - j) * spacing;
      f.scene.receivers.push_back({PersonName(k++), {x, y}});
      labels.push_back(r);
    }
  }
  f.scene.rows_ground_truth = labels;
  if (rows > 1) f.plan.second = sim::SecondSweep{distance_l, distance_w, 3.4};
  return f;
}

// ---- Experiments ----

void ExperimentSpec::Validate() const {
  if (repetitions < 1) throw ConfigError("experiment: repetitions must be >= 1");
  if (cells.empty()) throw ConfigError("experiment: no cells");
}

ExperimentSpec GridSpec(const std::vector<double>& distances,
                        const std::vector<int>& receiver_counts,
                        const std::vector<int>& row_counts,
                        const std::vector<sim::ChannelParams>& channels,
                        int repetitions, std::uint64_t seed_base) {
  ExperimentSpec spec;
  spec.repetitions = repetitions;
  spec.seed_base = seed_base;
  for (double d : distances) {
    for (int n : receiver_counts) {
      for (int rows : row_counts) {
        for (const auto& ch : channels) {
          ExperimentCell cell;
          cell.distance = d;
          cell.channel = ch;
          if (rows <= 1) {
            cell.scene = SingleRowScene(n, d);
          } else {
            const int per_row = (n + rows - 1) / rows;
            sim::SceneFile f = MultiRowScene(rows, per_row, d);
            cell.scene = f.scene;
            cell.plan = f.plan;
          }
          std::ostringstream label;
          label << "d=" << d << "m n=" << cell.scene.receivers.size() << " rows=" << rows
                << " " << sim::ToString(ch.noise);
          if (ch.noise != sim::NoiseKind::kNone) label << "@" << ch.target_snr_db << "dB";
          cell.label = label.str();
          spec.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return spec;
}

std::uint64_t CellSeed(std::uint64_t seed_base, std::size_t cell, int repetition) {
  return sim::DeriveSeed(seed_base, cell + 1, static_cast<std::uint64_t>(repetition) + 1);
}

std::vector<ExperimentRow> RunExperiment(const ExperimentSpec& spec) {
  spec.Validate();
  std::vector<ExperimentRow> raw, agg;
  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    const ExperimentCell& cell = spec.cells[c];
    SessionOptions options = spec.options;
    options.channel = cell.channel;
    ExperimentRow total;
    total.cell = c;
    total.label = cell.label;
    total.aggregate = true;
    total.noise = std::string(sim::ToString(cell.channel.noise));
    total.snr_db = cell.channel.target_snr_db;
    total.distance = cell.distance;
    total.receivers = static_cast<int>(cell.scene.receivers.size());
    total.rows = cell.scene.RowCount();
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      ExperimentRow row = total;
      row.aggregate = false;
      row.repetition = rep;
      row.seed = CellSeed(spec.seed_base, c, rep);
      const SessionResult r = RunSession(cell.scene, cell.plan, options, row.seed);
      row.sessions = 1;
      row.matched = r.matched ? 1 : 0;
      row.counts = CountInclusion(r.layout, r.truth);
      row.positions_total = static_cast<int>(r.truth.PlacedNames().size());
      row.positions_correct = CorrectPositions(r.layout, r.truth);
      total.sessions += 1;
      total.matched += row.matched;
      total.counts += row.counts;
      total.positions_total += row.positions_total;
      total.positions_correct += row.positions_correct;
      raw.push_back(std::move(row));
    }
    agg.push_back(std::move(total));
  }
  raw.insert(raw.end(), agg.begin(), agg.end());
  return raw;
}

void WriteCsv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    std::string label = r.label;
    std::replace(label.begin(), label.end(), ',', ';');
    out << (r.aggregate ? "aggregate" : "raw") << ',' << r.cell << ',' << label << ',';
    if (r.aggregate) {
      out << ",,";
    } else {
      out << r.repetition << ',' << r.seed << ',';
    }
    out << r.noise << ',';
    if (r.noise == "none") {
      out << "inf";
    } else {
      out << r.snr_db;
    }
    out << ',' << r.distance << ',' << r.receivers << ',' << r.rows << ',' << r.sessions
        << ',' << r.matched << ',' << std::setprecision(6) << r.Accuracy() << ','
        << r.counts.Precision() << ',' << r.counts.Recall() << ',' << r.counts.Fallout()
        << ',' << r.counts.inside << ',' << r.counts.outside << ',' << r.counts.tagged << ','
        << r.counts.inside_tagged << ',' << r.counts.outside_tagged << ','
        << r.positions_total << ',' << r.positions_correct << "\n";
  }
}

void WriteCsvFile(const std::vector<ExperimentRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  WriteCsv(rows, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace dopplertag::harness
