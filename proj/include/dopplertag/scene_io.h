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

// Scene files: UTF-8 JSON, meters for positions, degrees for angles.
//
// {
//   "camera": {"position": [0, 3], "optical_axis": [0, -1], "fov_deg": 70},
//   "receivers": [{"name": "ann", "position": [-0.5, 0], "row": 0}, ...],
//   "bystanders": [{"name": "zed", "position": [4, 0]}],
//   "sweep_plan": {"v_peak": 3.4,
//                  "second": {"L": 3, "W": 3, "v_peak": 3.4}}
// }
//
// "camera" fields default to the values shown. "row" is either present on
// every receiver or on none. "bystanders" and "sweep_plan" are optional.

#ifndef DOPPLERTAG_SCENE_IO_H_
#define DOPPLERTAG_SCENE_IO_H_

#include <string>

#include "dopplertag/scene_sim.h"
#include "json.hpp"

namespace dopplertag::sim {

struct SceneFile {
  Scene scene;
  SweepPlan plan;
};

// Throws ParseError naming the offending field; IoError when unreadable.
SceneFile SceneFromJson(const nlohmann::json& doc);
SceneFile LoadSceneFile(const std::string& path);
Scene LoadScene(const std::string& path);

nlohmann::json ToJson(const Scene& scene, const SweepPlan& plan);
void SaveSceneFile(const std::string& path, const Scene& scene,
                   const SweepPlan& plan);

}  // namespace dopplertag::sim

#endif  // DOPPLERTAG_SCENE_IO_H_
