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

// End-to-end composition: simulate, analyze, tag, score.

#ifndef DOPPLERTAG_HARNESS_H_
#define DOPPLERTAG_HARNESS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dopplertag/layout.h"
#include "dopplertag/receiver_dsp.h"
#include "dopplertag/scene_io.h"
#include "dopplertag/scene_sim.h"
#include "dopplertag/tag_engine.h"

namespace dopplertag::harness {

// Per-person inclusion counts; fractions are derived, never stored apart.
struct Confusion {
  int inside = 0;          // truly in the picture
  int outside = 0;         // group members truly out of it
  int tagged = 0;          // placed by the estimate
  int inside_tagged = 0;
  int outside_tagged = 0;

  Confusion& operator+=(const Confusion& o);
  // Vacuous denominators give precision 1, recall 1, fallout 0.
  double Precision() const;
  double Recall() const;
  double Fallout() const;
};

struct MetricsReport {
  int sessions = 0;
  int matched = 0;
  double accuracy = 0.0;
  double precision = 1.0;
  double recall = 1.0;
  double fallout = 0.0;
  // Share of truly placed people found at their exact row and position.
  double position_accuracy = 1.0;
  Confusion counts;
};

Confusion CountInclusion(const TagLayout& layout, const TagLayout& truth);
// People placed at the same row and position as in `truth`.
int CorrectPositions(const TagLayout& layout, const TagLayout& truth);

// Throws PreconditionError on a length mismatch.
MetricsReport ComputeMetrics(std::span<const TagLayout> layouts,
                             std::span<const TagLayout> truths);

struct SessionOptions {
  sim::ChannelParams channel;
  sim::SweepOptions sweep;
  dsp::PipelineConfig pipeline;
  std::optional<int> k_rows;
  double affinity_scale = tag::kSessionAffinityScale;
  double reply_timeout = 2.0;
};

struct SessionResult {
  TagLayout layout;
  TagLayout truth;
  bool matched = false;
  double v_sender_a = 0.0;
  std::optional<double> v_sender_b;
  std::vector<dsp::ShiftEstimate> estimates_a;  // undetected receivers omitted
  std::vector<dsp::ShiftEstimate> estimates_b;
};

// Every receiver runs the DSP pipeline and replies over a MessageBus; the
// sender measures its speed from the synthetic accelerometer.
SessionResult RunSession(const sim::Scene& scene, const sim::SweepPlan& plan,
                         const SessionOptions& options, std::uint64_t seed);

nlohmann::json ToJson(const SessionResult& result);

// ---- Tables ----

struct TableRow {
  std::string label;
  std::vector<double> computed;
  std::vector<double> published;
};

struct TableReport {
  std::string id;
  std::string title;
  std::vector<std::string> columns;
  std::vector<TableRow> rows;
  double max_deviation = 0.0;  // degrees

  bool Passes(double tolerance = 0.1) const { return max_deviation <= tolerance; }
};

// "I", "II" or "III"; throws ParseError otherwise.
TableReport ReproduceTable(std::string_view which);
void PrintTable(const TableReport& table, std::ostream& out);
nlohmann::json ToJson(const TableReport& table);

// ---- Scenes for experiments ----

// `count` receivers spaced `spacing` apart on a line `distance` ahead of the
// default camera, which sits at (0, distance) looking along -y.
sim::Scene SingleRowScene(int count, double distance, double spacing = 0.5);

// `rows` rows `row_gap` apart centered on the group center L ahead of the
// camera, `per_row` receivers each spaced `spacing` apart. Plan included.
sim::SceneFile MultiRowScene(int rows, int per_row, double distance_l = 3.0,
                             double distance_w = 3.0, double row_gap = 1.0,
                             double spacing = 0.8);

// ---- Experiments ----

struct ExperimentCell {
  std::string label;
  sim::Scene scene;
  sim::SweepPlan plan;
  sim::ChannelParams channel;
  double distance = 0.0;  // informational, m
};

struct ExperimentSpec {
  std::vector<ExperimentCell> cells;
  int repetitions = 20;
  std::uint64_t seed_base = 0;
  SessionOptions options;  // channel is taken from each cell

  void Validate() const;
};

// Grid over distance x receiver count x row count x channel. Row counts above
// one use the two-sweep plan; single rows place receivers at `distance`.
ExperimentSpec GridSpec(const std::vector<double>& distances,
                        const std::vector<int>& receiver_counts,
                        const std::vector<int>& row_counts,
                        const std::vector<sim::ChannelParams>& channels,
                        int repetitions, std::uint64_t seed_base);

struct ExperimentRow {
  std::size_t cell = 0;
  std::string label;
  bool aggregate = false;
  int repetition = -1;
  std::uint64_t seed = 0;
  std::string noise;
  double snr_db = 0.0;
  double distance = 0.0;
  int receivers = 0;
  int rows = 0;
  int sessions = 0;
  int matched = 0;
  Confusion counts;
  int positions_total = 0;
  int positions_correct = 0;

  double Accuracy() const { return sessions ? static_cast<double>(matched) / sessions : 0.0; }
};

std::uint64_t CellSeed(std::uint64_t seed_base, std::size_t cell, int repetition);

// One raw row per (cell, repetition), then one aggregate row per cell.
std::vector<ExperimentRow> RunExperiment(const ExperimentSpec& spec);

inline constexpr std::string_view kCsvHeader =
    "kind,cell,label,rep,seed,noise,snr_db,distance_m,receivers,rows,sessions,"
    "matched,accuracy,precision,recall,fallout,inside,outside,tagged,"
    "inside_tagged,outside_tagged,positions_total,positions_correct";

void WriteCsv(const std::vector<ExperimentRow>& rows, std::ostream& out);
// Throws IoError when the path cannot be written.
void WriteCsvFile(const std::vector<ExperimentRow>& rows, const std::string& path);

}  // namespace dopplertag::harness

#endif  // DOPPLERTAG_HARNESS_H_
