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

#include "dopplertag/layout.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "dopplertag/errors.h"

namespace dopplertag {

std::string_view ToString(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::kOutOfFov:
      return "out_of_fov";
    case ExclusionReason::kNoReply:
      return "no_reply";
    case ExclusionReason::kToneNotDetected:
      return "tone_not_detected";
    case ExclusionReason::kInconsistent:
      return "inconsistent";
  }
  return "unknown";
}

std::string_view ToString(SweepId id) { return id == SweepId::kA ? "A" : "B"; }

ExclusionReason ExclusionReasonFromString(std::string_view text) {
  if (text == "out_of_fov") return ExclusionReason::kOutOfFov;
  if (text == "no_reply") return ExclusionReason::kNoReply;
  if (text == "tone_not_detected") return ExclusionReason::kToneNotDetected;
  if (text == "inconsistent") return ExclusionReason::kInconsistent;
  throw ParseError("unknown exclusion reason '" + std::string(text) + "'");
}

std::vector<std::string> TagLayout::PlacedNames() const {
  std::vector<std::string> out;
  for (const auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  return out;
}

bool TagLayout::IsPlaced(const std::string& name) const {
  return std::any_of(rows.begin(), rows.end(), [&](const auto& row) {
    return std::find(row.begin(), row.end(), name) != row.end();
  });
}

bool SameLayout(const TagLayout& a, const TagLayout& b) {
  if (a.rows != b.rows) return false;
  std::set<std::string> ea, eb;
  for (const auto& [name, reason] : a.excluded) ea.insert(name);
  for (const auto& [name, reason] : b.excluded) eb.insert(name);
  return ea == eb;
}

nlohmann::json ToJson(const TagLayout& layout) {
  nlohmann::json doc;
  doc["rows"] = layout.rows;
  doc["excluded"] = nlohmann::json::object();
  for (const auto& [name, reason] : layout.excluded) {
    doc["excluded"][name] = std::string(ToString(reason));
  }
  doc["angles"] = nlohmann::json::object();
  for (const auto& [name, alpha] : layout.angles) {
    doc["angles"][name] = geometry::RadToDeg(alpha);
  }
  doc["coordinates"] = nlohmann::json::object();
  for (const auto& [name, p] : layout.coordinates) {
    doc["coordinates"][name] = {p.x, p.y};
  }
  if (!layout.warnings.empty()) doc["warnings"] = layout.warnings;
  return doc;
}

TagLayout LayoutFromJson(const nlohmann::json& doc) {
  TagLayout out;
  try {
    out.rows = doc.at("rows").get<std::vector<std::vector<std::string>>>();
    if (doc.contains("excluded")) {
      for (const auto& [name, reason] : doc.at("excluded").items()) {
        out.excluded[name] = ExclusionReasonFromString(reason.get<std::string>());
      }
    }
    if (doc.contains("angles")) {
      for (const auto& [name, deg] : doc.at("angles").items()) {
        out.angles[name] = geometry::DegToRad(deg.get<double>());
      }
    }
    if (doc.contains("coordinates")) {
      for (const auto& [name, xy] : doc.at("coordinates").items()) {
        out.coordinates[name] = {xy.at(0).get<double>(), xy.at(1).get<double>()};
      }
    }
    if (doc.contains("warnings")) {
      out.warnings = doc.at("warnings").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("layout: ") + e.what());
  }
  return out;
}

std::string RenderCaption(const TagLayout& layout) {
  std::ostringstream os;
  if (layout.rows.empty()) {
    os << "Nobody tagged.";
  }
  for (std::size_t r = 0; r < layout.rows.size(); ++r) {
    if (r > 0) os << ' ';
    if (layout.rows.size() == 1) {
      os << "Left to right: ";
    } else if (r == 0) {
      os << "Front row, left to right: ";
    } else {
      os << "Row " << r + 1 << ": ";
    }
    for (std::size_t i = 0; i < layout.rows[r].size(); ++i) {
      os << (i ? ", " : "") << layout.rows[r][i];
    }
    os << '.';
  }
  if (!layout.excluded.empty()) {
    os << " Not pictured: ";
    bool first = true;
    for (const auto& [name, reason] : layout.excluded) {
      os << (first ? "" : ", ") << name << " (";
      switch (reason) {
        case ExclusionReason::kOutOfFov:
          os << "out of view";
          break;
        case ExclusionReason::kNoReply:
          os << "no reply";
          break;
        case ExclusionReason::kToneNotDetected:
          os << "tone not heard";
          break;
        case ExclusionReason::kInconsistent:
          os << "inconsistent";
          break;
      }
      os << ')';
      first = false;
    }
    os << '.';
  }
  return os.str();
}

}  // namespace dopplertag
