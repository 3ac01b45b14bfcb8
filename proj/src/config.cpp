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

#include "textspot/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "textspot/error.hpp"

namespace textspot {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Reads `key` of `section` into `out` when present, reporting the dotted
// field name on type errors.
template <typename T>
void Read(const json& section, const std::string& prefix, const char* key,
          T& out) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config field " + prefix + key +
                          " has the wrong type");
  }
}

void RejectUnknown(const json& section, const std::string& name,
                   std::initializer_list<const char*> known) {
  if (!section.is_object()) {
    throw ValidationError("config section " + name + " must be an object");
  }
  for (const auto& [key, _] : section.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ValidationError("unknown config field " + name + "." + key);
  }
}

ojson ToJson(const gym::ExperimentConfig& c) {
  ojson j;
  const auto& w = c.world;
  j["world"] = {{"grid_rows", w.grid_rows},
                {"grid_cols", w.grid_cols},
                {"min_words", w.min_words},
                {"max_words", w.max_words},
                {"min_chars", w.min_chars},
                {"max_chars", w.max_chars},
                {"alphabet", w.alphabet},
                {"max_word_len", w.max_word_len},
                {"feature_dim", w.feature_dim},
                {"noise", w.noise},
                {"num_queries", w.num_queries},
                {"char_width", w.char_width},
                {"box_height", w.box_height},
                {"shift_seed", w.shift_seed},
                {"shift_angle", w.shift_angle},
                {"shift_bias", w.shift_bias}};
  j["model"] = {{"d_emb", c.d_emb}, {"hidden", c.hidden},
                {"key_dim", c.key_dim}};
  const auto& t = c.train;
  j["train"] = {{"learning_rate", t.learning_rate},
                {"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"seed", t.seed},
                {"mode", std::string(gym::ToString(t.mode))}};
  j["cost_weights"] = {{"alpha_class", t.cost.alpha_class},
                       {"alpha_l1", t.cost.alpha_l1},
                       {"alpha_giou", t.cost.alpha_giou},
                       {"alpha_rec", t.cost.alpha_rec},
                       {"normalize_rec_length", t.cost.normalize_rec_length}};
  j["loss_weights"] = {{"beta_class", t.loss.beta_class},
                       {"beta_l1", t.loss.beta_l1},
                       {"beta_giou", t.loss.beta_giou},
                       {"beta_rec", t.loss.beta_rec},
                       {"noobj_coef", t.loss.noobj_coef},
                       {"normalize_rec_length", t.loss.normalize_rec_length}};
  j["experiment"] = {{"pretrain_epochs", c.pretrain_epochs},
                     {"finetune_epochs", c.finetune_epochs},
                     {"finetune_learning_rate", c.finetune_learning_rate},
                     {"train_scenes", c.train_scenes},
                     {"test_scenes", c.test_scenes},
                     {"score_threshold", c.score_threshold},
                     {"iou_threshold", c.iou_threshold}};
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  return j;
}

gym::ExperimentConfig FromJson(const json& j) {
  RejectUnknown(j, "config",
                {"world", "model", "train", "cost_weights", "loss_weights",
                 "experiment", "seeds", "output_dir"});
  gym::ExperimentConfig c;
  if (j.contains("world")) {
    const auto& s = j["world"];
    RejectUnknown(s, "world",
                  {"grid_rows", "grid_cols", "min_words", "max_words",
                   "min_chars", "max_chars", "alphabet", "max_word_len",
                   "feature_dim", "noise", "num_queries", "char_width",
                   "box_height", "shift_seed", "shift_angle",
                   "shift_bias"});
    auto& w = c.world;
    const std::string p = "world.";
    Read(s, p, "grid_rows", w.grid_rows);
    Read(s, p, "grid_cols", w.grid_cols);
    Read(s, p, "min_words", w.min_words);
    Read(s, p, "max_words", w.max_words);
    Read(s, p, "min_chars", w.min_chars);
    Read(s, p, "max_chars", w.max_chars);
    Read(s, p, "alphabet", w.alphabet);
    Read(s, p, "max_word_len", w.max_word_len);
    Read(s, p, "feature_dim", w.feature_dim);
    Read(s, p, "noise", w.noise);
    Read(s, p, "num_queries", w.num_queries);
    Read(s, p, "char_width", w.char_width);
    Read(s, p, "box_height", w.box_height);
    Read(s, p, "shift_seed", w.shift_seed);
    Read(s, p, "shift_angle", w.shift_angle);
    Read(s, p, "shift_bias", w.shift_bias);
  }
  if (j.contains("model")) {
    const auto& s = j["model"];
    RejectUnknown(s, "model", {"d_emb", "hidden", "key_dim"});
    Read(s, "model.", "d_emb", c.d_emb);
    Read(s, "model.", "hidden", c.hidden);
    Read(s, "model.", "key_dim", c.key_dim);
  }
  auto& t = c.train;
  if (j.contains("train")) {
    const auto& s = j["train"];
    RejectUnknown(s, "train",
                  {"learning_rate", "epochs", "batch_size", "seed", "mode"});
    Read(s, "train.", "learning_rate", t.learning_rate);
    Read(s, "train.", "epochs", t.epochs);
    Read(s, "train.", "batch_size", t.batch_size);
    Read(s, "train.", "seed", t.seed);
    std::string mode(gym::ToString(t.mode));
    Read(s, "train.", "mode", mode);
    try {
      t.mode = gym::ParseTrainMode(mode);
    } catch (const ArgumentError& e) {
      throw ValidationError(std::string("train.mode: ") + e.what());
    }
  }
  if (j.contains("cost_weights")) {
    const auto& s = j["cost_weights"];
    RejectUnknown(s, "cost_weights",
                  {"alpha_class", "alpha_l1", "alpha_giou", "alpha_rec",
                   "normalize_rec_length"});
    const std::string p = "cost_weights.";
    Read(s, p, "alpha_class", t.cost.alpha_class);
    Read(s, p, "alpha_l1", t.cost.alpha_l1);
    Read(s, p, "alpha_giou", t.cost.alpha_giou);
    Read(s, p, "alpha_rec", t.cost.alpha_rec);
    Read(s, p, "normalize_rec_length", t.cost.normalize_rec_length);
  }
  if (j.contains("loss_weights")) {
    const auto& s = j["loss_weights"];
    RejectUnknown(s, "loss_weights",
                  {"beta_class", "beta_l1", "beta_giou", "beta_rec",
                   "noobj_coef", "normalize_rec_length"});
    const std::string p = "loss_weights.";
    Read(s, p, "beta_class", t.loss.beta_class);
    Read(s, p, "beta_l1", t.loss.beta_l1);
    Read(s, p, "beta_giou", t.loss.beta_giou);
    Read(s, p, "beta_rec", t.loss.beta_rec);
    Read(s, p, "noobj_coef", t.loss.noobj_coef);
    Read(s, p, "normalize_rec_length", t.loss.normalize_rec_length);
  }
  if (j.contains("experiment")) {
    const auto& s = j["experiment"];
    RejectUnknown(s, "experiment",
                  {"pretrain_epochs", "finetune_epochs", "finetune_learning_rate",
                   "train_scenes", "test_scenes", "score_threshold", "iou_threshold"});
    const std::string p = "experiment.";
    Read(s, p, "pretrain_epochs", c.pretrain_epochs);
    Read(s, p, "finetune_epochs", c.finetune_epochs);
    Read(s, p, "finetune_learning_rate", c.finetune_learning_rate);
    Read(s, p, "train_scenes", c.train_scenes);
    Read(s, p, "test_scenes", c.test_scenes);
    Read(s, p, "score_threshold", c.score_threshold);
    Read(s, p, "iou_threshold", c.iou_threshold);
  }
  Read(j, "", "seeds", c.seeds);
  Read(j, "", "output_dir", c.output_dir);
  c.Validate();
  return c;
}

}  // namespace

gym::ExperimentConfig ExperimentConfigFromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(e.id == 101 ? 1 : 0, e.what());
  }
  return FromJson(j);
}

gym::ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ExperimentConfigFromJson(buf.str());
}

std::string ExperimentConfigToJson(const gym::ExperimentConfig& config) {
  return ToJson(config).dump(2) + "\n";
}

void ApplyOverride(gym::ExperimentConfig& config, std::string_view key,
                   std::string_view value) {
  json j = json::parse(ToJson(config).dump());
  std::string pointer = "/" + std::string(key);
  for (char& c : pointer) {
    if (c == '.') c = '/';
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = std::string(value);
  }
  const json::json_pointer ptr(pointer);
  if (!j.contains(ptr)) {
    throw ValidationError("unknown config field " + std::string(key));
  }
  j[ptr] = parsed;
  config = FromJson(j);
}

}  // namespace textspot
