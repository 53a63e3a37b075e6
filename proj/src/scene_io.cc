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

#include "dopplertag/scene_io.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dopplertag/errors.h"

namespace dopplertag::sim {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& where, const std::string& why) {
  throw ParseError(where + ": " + why);
}

double Number(const json& j, const std::string& where) {
  if (!j.is_number()) Fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) Fail(where, "not finite");
  return v;
}

PlanarPoint Point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) Fail(where, "expected [x, y]");
  return {Number(j[0], where + "[0]"), Number(j[1], where + "[1]")};
}

const json* Field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& Required(const json& obj, const char* key, const std::string& where) {
  const json* f = Field(obj, key);
  if (!f) Fail(where + "." + key, "missing");
  return *f;
}

void RequireObject(const json& j, const std::string& where) {
  if (!j.is_object()) Fail(where, "expected an object");
}

Person ParsePerson(const json& j, const std::string& where) {
  RequireObject(j, where);
  const json& name = Required(j, "name", where);
  if (!name.is_string() || name.get<std::string>().empty()) {
    Fail(where + ".name", "expected a nonempty string");
  }
  return {name.get<std::string>(), Point(Required(j, "position", where), where + ".position")};
}

}  // namespace

SceneFile SceneFromJson(const json& doc) {
  RequireObject(doc, "scene");
  SceneFile out;
  Scene& scene = out.scene;

  if (const json* cam = Field(doc, "camera")) {
    RequireObject(*cam, "camera");
    if (const json* p = Field(*cam, "position")) scene.camera_position = Point(*p, "camera.position");
    if (const json* a = Field(*cam, "optical_axis")) {
      const PlanarPoint axis = Point(*a, "camera.optical_axis");
      const double n = std::hypot(axis.x, axis.y);
      if (n < 1e-9) Fail("camera.optical_axis", "zero vector");
      scene.optical_axis = {axis.x / n, axis.y / n};
    }
    if (const json* f = Field(*cam, "fov_deg")) {
      const double deg = Number(*f, "camera.fov_deg");
      if (!(deg > 0.0 && deg < 180.0)) Fail("camera.fov_deg", "must lie in (0, 180)");
      scene.fov = geometry::DegToRad(deg);
    }
  }

  std::set<std::string> names;
  const json& rx = Required(doc, "receivers", "scene");
  if (!rx.is_array() || rx.empty()) Fail("receivers", "expected a nonempty array");
  std::vector<int> rows;
  int with_row = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const std::string where = "receivers[" + std::to_string(i) + "]";
    Person p = ParsePerson(rx[i], where);
    if (!names.insert(p.name).second) Fail(where + ".name", "duplicate name '" + p.name + "'");
    if (const json* r = Field(rx[i], "row")) {
      if (!r->is_number_integer() || r->get<int>() < 0) {
        Fail(where + ".row", "expected a non-negative integer");
      }
      rows.push_back(r->get<int>());
      ++with_row;
    }
    scene.receivers.push_back(std::move(p));
  }
  if (with_row != 0 && with_row != static_cast<int>(rx.size())) {
    Fail("receivers", "'row' must be given for every receiver or for none");
  }
  if (with_row != 0) scene.rows_ground_truth = rows;

  if (const json* by = Field(doc, "bystanders")) {
    if (!by->is_array()) Fail("bystanders", "expected an array");
    for (std::size_t i = 0; i < by->size(); ++i) {
      const std::string where = "bystanders[" + std::to_string(i) + "]";
      Person p = ParsePerson((*by)[i], where);
      if (!names.insert(p.name).second) Fail(where + ".name", "duplicate name '" + p.name + "'");
      scene.bystanders.push_back(std::move(p));
    }
  }

  if (const json* sp = Field(doc, "sweep_plan")) {
    RequireObject(*sp, "sweep_plan");
    if (const json* v = Field(*sp, "v_peak")) {
      out.plan.v_peak_a = Number(*v, "sweep_plan.v_peak");
      if (!(out.plan.v_peak_a > 0.0)) Fail("sweep_plan.v_peak", "must be positive");
    }
    if (const json* s = Field(*sp, "second")) {
      RequireObject(*s, "sweep_plan.second");
      SecondSweep second;
      second.distance_l = Number(Required(*s, "L", "sweep_plan.second"), "sweep_plan.second.L");
      second.distance_w = Number(Required(*s, "W", "sweep_plan.second"), "sweep_plan.second.W");
      if (const json* v = Field(*s, "v_peak")) second.v_peak = Number(*v, "sweep_plan.second.v_peak");
      if (!(second.distance_l > 0.0)) Fail("sweep_plan.second.L", "must be positive");
      if (!(second.distance_w > 0.0)) Fail("sweep_plan.second.W", "must be positive");
      if (!(second.v_peak > 0.0)) Fail("sweep_plan.second.v_peak", "must be positive");
      out.plan.second = second;
    }
  }

  try {
    scene.Validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  return out;
}

SceneFile LoadSceneFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": invalid JSON: " + e.what());
  }
  try {
    return SceneFromJson(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Scene LoadScene(const std::string& path) { return LoadSceneFile(path).scene; }

json ToJson(const Scene& scene, const SweepPlan& plan) {
  json doc;
  doc["camera"] = {
      {"position", {scene.camera_position.x, scene.camera_position.y}},
      {"optical_axis", {scene.optical_axis.x, scene.optical_axis.y}},
      {"fov_deg", geometry::RadToDeg(scene.fov)}};
  json rx = json::array();
  for (std::size_t i = 0; i < scene.receivers.size(); ++i) {
    const Person& p = scene.receivers[i];
    json r = {{"name", p.name}, {"position", {p.position.x, p.position.y}}};
    if (scene.rows_ground_truth) r["row"] = (*scene.rows_ground_truth)[i];
    rx.push_back(std::move(r));
  }
  doc["receivers"] = std::move(rx);
  if (!scene.bystanders.empty()) {
    json by = json::array();
    for (const Person& p : scene.bystanders) {
      by.push_back({{"name", p.name}, {"position", {p.position.x, p.position.y}}});
    }
    doc["bystanders"] = std::move(by);
  }
  json sp = {{"v_peak", plan.v_peak_a}};
  if (plan.second) {
    sp["second"] = {{"L", plan.second->distance_l},
                    {"W", plan.second->distance_w},
                    {"v_peak", plan.second->v_peak}};
  }
  doc["sweep_plan"] = std::move(sp);
  return doc;
}

void SaveSceneFile(const std::string& path, const Scene& scene,
                   const SweepPlan& plan) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene file '" + path + "'");
  out << ToJson(scene, plan).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace dopplertag::sim
