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

#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "dopplertag/errors.h"
#include "dopplertag/scene_io.h"

namespace sim = dopplertag::sim;
using nlohmann::json;

namespace {

std::string Fixture(const std::string& name) {
  return std::string(DOPPLERTAG_FIXTURES) + "/" + name;
}

std::string ParseMessage(const json& doc) {
  try {
    sim::SceneFromJson(doc);
  } catch (const dopplertag::ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("scene_io") {

TEST_CASE("minimal scene takes camera defaults") {
  const auto f = sim::SceneFromJson(json::parse(R"({"receivers":[{"name":"a","position":[0,0]}]})"));
  CHECK(f.scene.receivers.size() == 1);
  CHECK(f.scene.camera_position == dopplertag::geometry::PlanarPoint{0, 3});
  CHECK(f.scene.fov == doctest::Approx(dopplertag::geometry::DegToRad(70)));
  CHECK_FALSE(f.scene.rows_ground_truth.has_value());
  CHECK_FALSE(f.plan.second.has_value());
  CHECK(f.plan.v_peak_a == 3.4);
}

TEST_CASE("errors name the field") {
  CHECK(ParseMessage(json::parse(R"({"receivers":[{"name":"x","position":[0,0]},{"name":"x","position":[1,0]}]})"))
            .find("receivers[1].name") != std::string::npos);
  CHECK(ParseMessage(json::parse(R"({"receivers":[{"name":"x","position":[0]}]})"))
            .find("receivers[0].position") != std::string::npos);
  CHECK(ParseMessage(json::parse(R"({"receivers":[{"name":"x","position":[0,0],"row":0},{"name":"y","position":[1,0]}]})"))
            .find("row") != std::string::npos);
  CHECK(ParseMessage(json::parse(R"({"receivers":[]})")).find("receivers") != std::string::npos);
  CHECK(ParseMessage(json::parse(R"({"camera":{"fov_deg":-5},"receivers":[{"name":"x","position":[0,0]}]})"))
            .find("fov") != std::string::npos);
  CHECK_FALSE(ParseMessage(json::parse(R"([1,2])")).empty());
}

TEST_CASE("fixtures load") {
  const auto single = sim::LoadSceneFile(Fixture("single_row_3m.json"));
  CHECK(single.scene.receivers.size() == 6);
  CHECK(single.scene.RowCount() == 1);
  const auto two = sim::LoadSceneFile(Fixture("two_rows.json"));
  CHECK(two.scene.RowCount() == 2);
  CHECK(two.scene.bystanders.size() == 1);
  REQUIRE(two.plan.second.has_value());
  CHECK(two.plan.second->distance_w == 3.0);
  CHECK_THROWS_AS(sim::LoadSceneFile(Fixture("invalid_duplicate.json")), dopplertag::ParseError);
  CHECK_THROWS_AS(sim::LoadSceneFile(Fixture("does_not_exist.json")), dopplertag::IoError);
}

TEST_CASE("save and load round trip") {
  const auto two = sim::LoadSceneFile(Fixture("two_rows.json"));
  const auto path = (std::filesystem::temp_directory_path() / "dopplertag_scene_rt.json").string();
  sim::SaveSceneFile(path, two.scene, two.plan);
  const auto back = sim::LoadSceneFile(path);
  std::remove(path.c_str());
  CHECK(sim::ToJson(back.scene, back.plan) == sim::ToJson(two.scene, two.plan));
  CHECK(back.scene.rows_ground_truth == two.scene.rows_ground_truth);
  CHECK(back.scene.Find("zed").position == two.scene.Find("zed").position);
}

}  // TEST_SUITE
