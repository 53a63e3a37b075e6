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

#ifndef DOPPLERTAG_LAYOUT_H_
#define DOPPLERTAG_LAYOUT_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dopplertag/geometry.h"
#include "json.hpp"

namespace dopplertag {

enum class ExclusionReason { kOutOfFov, kNoReply, kToneNotDetected, kInconsistent };

// A is the picturing position; B is the optional localization-only sweep.
enum class SweepId { kA, kB };

std::string_view ToString(SweepId id);

std::string_view ToString(ExclusionReason reason);
ExclusionReason ExclusionReasonFromString(std::string_view text);

// Final tagging result for one picture. Rows run front to back; names in a
// row run left to right as seen by the camera. Coordinates, when present, are
// in the picture frame: x is lateral offset to the camera's right, y is depth
// from the camera along its optical axis, both in meters.
struct TagLayout {
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, ExclusionReason> excluded;
  std::map<std::string, double> angles;  // signed alpha, radians
  std::map<std::string, geometry::PlanarPoint> coordinates;
  std::vector<std::string> warnings;

  std::vector<std::string> PlacedNames() const;
  bool IsPlaced(const std::string& name) const;
};

// Exact equality of rows, in-row order and the excluded name set. Angles,
// coordinates, reasons and warnings are not compared.
bool SameLayout(const TagLayout& a, const TagLayout& b);

nlohmann::json ToJson(const TagLayout& layout);
TagLayout LayoutFromJson(const nlohmann::json& doc);

// One caption line, e.g.
// "Front row, left to right: ann, bob. Row 2: cy. Not pictured: dee (out of view)."
std::string RenderCaption(const TagLayout& layout);

}  // namespace dopplertag

#endif  // DOPPLERTAG_LAYOUT_H_
