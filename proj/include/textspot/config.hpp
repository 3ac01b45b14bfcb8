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

#ifndef TEXTSPOT_CONFIG_HPP_
#define TEXTSPOT_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "textspot/toygym.hpp"

namespace textspot {

// JSON experiment configuration with sections world, model, train,
// cost_weights, loss_weights, experiment, plus seeds and output_dir. Missing
// keys keep their defaults; unknown keys are rejected.
gym::ExperimentConfig ExperimentConfigFromJson(std::string_view text);
gym::ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);
std::string ExperimentConfigToJson(const gym::ExperimentConfig& config);

// Sets one field by dotted path ("world.noise") to a JSON value ("0.2").
// Bare words that are not valid JSON are taken as strings.
void ApplyOverride(gym::ExperimentConfig& config, std::string_view key,
                   std::string_view value);

}  // namespace textspot

#endif  // TEXTSPOT_CONFIG_HPP_
