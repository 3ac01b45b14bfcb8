// Copyright 2026 The textspot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "textspot/config.hpp"
#include "textspot/error.hpp"

using namespace textspot;

TEST_CASE("defaults survive a json round trip") {
  const gym::ExperimentConfig defaults;
  const std::string text = ExperimentConfigToJson(defaults);
  const auto back = ExperimentConfigFromJson(text);
  CHECK(ExperimentConfigToJson(back) == text);
  CHECK(back.world.shift_angle == defaults.world.shift_angle);
  CHECK(back.train.learning_rate == defaults.train.learning_rate);
  CHECK(back.seeds == defaults.seeds);
  CHECK(ExperimentConfigToJson(ExperimentConfigFromJson("{}")) == text);
}

TEST_CASE("partial sections keep the other defaults") {
  const auto c = ExperimentConfigFromJson(
      R"({"world": {"noise": 0.3}, "train": {"mode": "weak"}, "seeds": [4]})");
  CHECK(c.world.noise == 0.3);
  CHECK(c.world.grid_rows == gym::WorldConfig{}.grid_rows);
  CHECK(c.train.mode == gym::TrainMode::kWeak);
  CHECK(c.seeds == std::vector<std::uint64_t>{4});
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS_AS(ExperimentConfigFromJson(R"({"world": {"colour": 1}})"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfigFromJson(R"({"extra": 1})"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfigFromJson(R"({"world": {"noise": "high"}})"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfigFromJson(R"({"world": {"noise": -1}})"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfigFromJson(R"({"seeds": []})"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfigFromJson(R"({"cost_weights": {"alpha_rec": -1}})"),
                  ValidationError);
  CHECK_THROWS_AS(ExperimentConfigFromJson("{not json"), ParseError);
}

TEST_CASE("overrides by dotted path") {
  gym::ExperimentConfig c;
  ApplyOverride(c, "world.noise", "0.25");
  ApplyOverride(c, "train.mode", "detcls");
  ApplyOverride(c, "experiment.finetune_learning_rate", "0.01");
  ApplyOverride(c, "seeds", "[7, 8]");
  CHECK(c.world.noise == 0.25);
  CHECK(c.train.mode == gym::TrainMode::kDetClsOnly);
  CHECK(c.finetune_learning_rate == 0.01);
  CHECK(c.seeds == std::vector<std::uint64_t>{7, 8});
  CHECK_THROWS_AS(ApplyOverride(c, "world.colour", "1"), ValidationError);
  CHECK_THROWS_AS(ApplyOverride(c, "train.epochs", "0"), ValidationError);
}

TEST_CASE("config files") {
  const auto path = std::filesystem::temp_directory_path() / "textspot_config.json";
  std::ofstream(path) << R"({"experiment": {"train_scenes": 12}})";
  CHECK(LoadExperimentConfig(path).train_scenes == 12);
  CHECK_THROWS_AS(LoadExperimentConfig("/nonexistent/config.json"), IoError);
}
