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

#include "textspot/textspot.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <string>

#include <json.hpp>

#include "textspot/config.hpp"
#include "textspot/error.hpp"
#include "textspot/evalkit.hpp"
#include "textspot/spotloss.hpp"
#include "textspot/toygym.hpp"

struct ts_config {
  textspot::gym::ExperimentConfig value;
};

struct ts_dataset {
  textspot::Alphabet alphabet;
  std::size_t max_word_len;
  std::vector<textspot::Scene> scenes;
};

struct ts_model {
  textspot::gym::ToyModel value;
};

namespace {

using namespace textspot;
using ojson = nlohmann::ordered_json;

thread_local std::string g_last_error;

ts_status StatusFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument:
      return TS_ERR_ARGUMENT;
    case ErrorKind::kValidation:
      return TS_ERR_VALIDATION;
    case ErrorKind::kCapacity:
      return TS_ERR_CAPACITY;
    case ErrorKind::kParse:
      return TS_ERR_PARSE;
    case ErrorKind::kIo:
      return TS_ERR_IO;
    case ErrorKind::kNumeric:
      return TS_ERR_NUMERIC;
  }
  return TS_ERR_INTERNAL;
}

template <typename Fn>
ts_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return TS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return StatusFor(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return TS_ERR_INTERNAL;
}

void Require(const void* p, const char* what) {
  if (p == nullptr) throw ArgumentError(std::string(what) + " is null");
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const Scene& FindScene(const ts_dataset& data, const std::string& id) {
  for (const auto& s : data.scenes) {
    if (s.scene_id == id) return s;
  }
  throw ValidationError("scene '" + id + "' is absent from the ground truth");
}

ojson MatrixJson(const Matrix& m) {
  ojson rows = ojson::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

ojson MatchJson(const MatchResult& match) {
  ojson j;
  j["assignment"] = match.assignment;
  j["total_cost"] = match.total_cost;
  ojson pairs = ojson::array();
  for (const auto& p : match.pairs) {
    pairs.push_back({{"gt", p.row},
                     {"pred", p.col},
                     {"classification", p.classification},
                     {"box", p.box},
                     {"recognition", p.recognition},
                     {"total", p.total}});
  }
  j["pairs"] = std::move(pairs);
  return j;
}

std::vector<SceneDetections> LoadPredictionsOrScenes(
    const std::string& path, const ts_dataset& gt) {
  try {
    return ParseDetections(path);
  } catch (const ParseError&) {
    std::vector<SceneDetections> out;
    for (const auto& scene :
         ParseDataset(path, gt.alphabet, gt.max_word_len)) {
      out.push_back(GroundTruthAsDetections(scene, gt.alphabet));
    }
    return out;
  }
}

}  // namespace

extern "C" {

const char* ts_version(void) { return "0.1.0"; }

const char* ts_status_name(ts_status status) {
  switch (status) {
    case TS_OK:
      return "ok";
    case TS_ERR_ARGUMENT:
      return "argument error";
    case TS_ERR_VALIDATION:
      return "validation error";
    case TS_ERR_CAPACITY:
      return "capacity error";
    case TS_ERR_PARSE:
      return "parse error";
    case TS_ERR_IO:
      return "I/O error";
    case TS_ERR_NUMERIC:
      return "numeric error";
    case TS_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* ts_last_error(void) { return g_last_error.c_str(); }

int ts_exit_code(ts_status status) {
  switch (status) {
    case TS_OK:
      return 0;
    case TS_ERR_ARGUMENT:
    case TS_ERR_VALIDATION:
    case TS_ERR_CAPACITY:
    case TS_ERR_PARSE:
      return 2;
    default:
      return 1;
  }
}

void ts_string_free(char* str) { std::free(str); }

ts_status ts_config_default(ts_config** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new ts_config{};
  });
}

ts_status ts_config_load(const char* path, ts_config** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new ts_config{LoadExperimentConfig(path)};
  });
}

ts_status ts_config_set(ts_config* cfg, const char* key, const char* value) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(key, "key");
    Require(value, "value");
    ApplyOverride(cfg->value, key, value);
  });
}

ts_status ts_config_to_json(const ts_config* cfg, char** out_json) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(out_json, "out_json");
    *out_json = Dup(ExperimentConfigToJson(cfg->value));
  });
}

void ts_config_free(ts_config* cfg) { delete cfg; }

ts_status ts_dataset_load(const char* path, const char* alphabet,
                          size_t max_word_len, ts_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    Alphabet a = alphabet ? Alphabet(alphabet) : Alphabet::Default();
    auto scenes = ParseDataset(path, a, max_word_len);
    *out = new ts_dataset{std::move(a), max_word_len, std::move(scenes)};
  });
}

size_t ts_dataset_size(const ts_dataset* data) {
  return data ? data->scenes.size() : 0;
}

void ts_dataset_free(ts_dataset* data) { delete data; }

ts_status ts_generate(const ts_config* cfg, const char* out_dir, uint64_t seed,
                      char** out_manifest_json) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(out_dir, "out_dir");
    const auto& c = cfg->value;
    c.Validate();
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const Alphabet alphabet = c.world.MakeAlphabet();
    ojson files = ojson::array();
    struct Variant {
      const char* name;
      gym::Domain domain;
      Supervision supervision;
    };
    const Variant variants[] = {
        {"domain_a_full", gym::Domain::kA, Supervision::kFull},
        {"domain_a_weak", gym::Domain::kA, Supervision::kWeak},
        {"domain_b_full", gym::Domain::kB, Supervision::kFull},
        {"domain_b_weak", gym::Domain::kB, Supervision::kWeak},
    };
    for (const auto& v : variants) {
      // Both supervision variants of a domain share scenes.
      const std::uint64_t domain_seed =
          seed * 2 + (v.domain == gym::Domain::kB ? 1 : 0);
      const auto scenes =
          gym::GenerateScenes(c.world, v.domain, v.supervision, c.train_scenes,
                              domain_seed, std::string(v.name) + "_");
      const auto path = dir / (std::string(v.name) + ".jsonl");
      WriteDataset(path, scenes, alphabet);
      files.push_back({{"name", v.name},
                       {"path", path.string()},
                       {"scenes", scenes.size()}});
    }
    if (out_manifest_json) {
      *out_manifest_json = Dup(ojson{{"seed", seed}, {"files", files}}.dump(2));
    }
  });
}

ts_status ts_iou(const double a[4], const double b[4], double* out) {
  return Guard([&] {
    Require(a, "a");
    Require(b, "b");
    Require(out, "out");
    *out = Iou(Box::Corners(a[0], a[1], a[2], a[3]),
               Box::Corners(b[0], b[1], b[2], b[3]));
  });
}

ts_status ts_giou(const double a[4], const double b[4], double* out) {
  return Guard([&] {
    Require(a, "a");
    Require(b, "b");
    Require(out, "out");
    *out = Giou(Box::Corners(a[0], a[1], a[2], a[3]),
                Box::Corners(b[0], b[1], b[2], b[3]));
  });
}

ts_status ts_solve_assignment(const double* costs, size_t rows, size_t cols,
                              size_t* out_assignment, double* out_total) {
  return Guard([&] {
    if (rows * cols > 0) Require(costs, "costs");
    if (rows > 0) Require(out_assignment, "out_assignment");
    CostMatrix m(rows, cols, std::vector<double>(costs, costs + rows * cols));
    const MatchResult r = SolveAssignment(m);
    for (std::size_t i = 0; i < rows; ++i) out_assignment[i] = r.assignment[i];
    if (out_total) *out_total = r.total_cost;
  });
}

ts_status ts_match(const char* raw_preds_path, const ts_dataset* gt,
                   const ts_config* cfg, const char* mode, char** out_json) {
  return Guard([&] {
    Require(raw_preds_path, "raw_preds_path");
    Require(gt, "gt");
    Require(cfg, "cfg");
    Require(out_json, "out_json");
    const MatchMode m = ParseMatchMode(mode ? mode : "full");
    const CostWeights& w = cfg->value.train.cost;
    w.Validate();
    const auto preds = ParseRawPredictions(
        raw_preds_path, gt->alphabet.size(), gt->max_word_len);
    ojson scenes = ojson::array();
    for (const auto& sp : preds) {
      const Scene& scene = FindScene(*gt, sp.scene_id);
      std::vector<GroundTruthInstance> text;
      for (const auto& g : scene.ground_truth) {
        if (g.cls == ObjectClass::kText) text.push_back(g);
      }
      const SpotCostMatrix costs = BuildCostMatrix(sp.preds, text, w, m);
      const MatchResult match = MatchPredictions(sp.preds, text, w, m);
      ojson j;
      j["scene_id"] = sp.scene_id;
      j["mode"] = std::string(ToString(m));
      j["cost_matrix"] = MatrixJson(costs.total);
      j["match"] = MatchJson(match);
      scenes.push_back(std::move(j));
    }
    *out_json = Dup(ojson{{"scenes", scenes}}.dump(2));
  });
}

ts_status ts_loss(const char* raw_preds_path, const ts_dataset* gt,
                  const ts_config* cfg, const char* mode, char** out_json) {
  return Guard([&] {
    Require(raw_preds_path, "raw_preds_path");
    Require(gt, "gt");
    Require(cfg, "cfg");
    Require(out_json, "out_json");
    const MatchMode m = ParseMatchMode(mode ? mode : "full");
    const auto& train = cfg->value.train;
    train.cost.Validate();
    train.loss.Validate();
    const auto preds = ParseRawPredictions(
        raw_preds_path, gt->alphabet.size(), gt->max_word_len);
    ojson scenes = ojson::array();
    double total = 0.0;
    for (const auto& sp : preds) {
      const Scene& scene = FindScene(*gt, sp.scene_id);
      const LossBreakdown loss =
          HungarianLoss(sp.preds, scene.ground_truth, train.cost, train.loss, m);
      total += loss.total;
      ojson j;
      j["scene_id"] = sp.scene_id;
      j["total"] = loss.total;
      j["classification"] = loss.classification;
      j["box_l1"] = loss.box_l1;
      j["box_giou"] = loss.box_giou;
      j["recognition"] = loss.recognition;
      j["match"] = MatchJson(loss.matching);
      scenes.push_back(std::move(j));
    }
    ojson doc;
    doc["mode"] = std::string(ToString(m));
    doc["total"] = total;
    doc["scenes"] = std::move(scenes);
    *out_json = Dup(doc.dump(2));
  });
}

ts_status ts_model_init(const ts_config* cfg, uint64_t seed, ts_model** out) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(out, "out");
    cfg->value.Validate();
    *out = new ts_model{gym::ToyModel::Init(cfg->value.model_shape(), seed)};
  });
}

ts_status ts_model_load(const char* path, ts_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new ts_model{gym::LoadCheckpoint(path)};
  });
}

ts_status ts_model_save(const ts_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    gym::SaveCheckpoint(path, model->value);
  });
}

ts_status ts_model_params_equal(const ts_model* a, const ts_model* b,
                                const char* prefix, int* out_equal) {
  return Guard([&] {
    Require(a, "a");
    Require(b, "b");
    Require(out_equal, "out_equal");
    if (!(a->value.shape() == b->value.shape())) {
      throw ArgumentError("models have different shapes");
    }
    const std::string_view p = prefix ? prefix : "";
    bool equal = true;
    const auto& pa = a->value.params();
    const auto& pb = b->value.params();
    for (std::size_t k = 0; k < pa.size(); ++k) {
      if (!pa[k].name.starts_with(p)) continue;
      equal = equal &&
              std::memcmp(pa[k].value.data.data(), pb[k].value.data.data(),
                          pa[k].value.data.size() * sizeof(double)) == 0;
    }
    *out_equal = equal ? 1 : 0;
  });
}

void ts_model_free(ts_model* model) { delete model; }

ts_status ts_train(ts_model* model, const ts_dataset* scenes,
                   const ts_config* cfg, char** out_history_json) {
  return Guard([&] {
    Require(model, "model");
    Require(scenes, "scenes");
    Require(cfg, "cfg");
    if (scenes->alphabet.size() != model->value.shape().alphabet_size) {
      throw ValidationError("dataset alphabet does not match the model");
    }
    auto result = gym::Train(model->value, scenes->scenes, cfg->value.train);
    model->value = std::move(result.model);
    if (out_history_json) {
      ojson j;
      j["mode"] = std::string(gym::ToString(cfg->value.train.mode));
      j["epochs"] = cfg->value.train.epochs;
      j["loss_history"] = result.loss_history;
      *out_history_json = Dup(j.dump(2));
    }
  });
}

ts_status ts_predict(const ts_model* model, const ts_dataset* scenes,
                     const ts_config* cfg, const char* out_path, int raw) {
  return Guard([&] {
    Require(model, "model");
    Require(scenes, "scenes");
    Require(cfg, "cfg");
    Require(out_path, "out_path");
    if (raw) {
      std::vector<ScenePredictions> preds;
      for (const auto& s : scenes->scenes) {
        preds.push_back({s.scene_id, gym::ModelForward(model->value, s)});
      }
      WriteRawPredictions(out_path, preds);
      return;
    }
    std::vector<SceneDetections> dets;
    for (const auto& s : scenes->scenes) {
      dets.push_back(gym::Detect(model->value, s, scenes->alphabet,
                                 cfg->value.score_threshold));
    }
    WriteDetections(out_path, dets);
  });
}

ts_status ts_evaluate(const char* preds_path, const ts_dataset* gt,
                      const char* task, double iou_threshold,
                      const char* lexicon_path, char** out_json) {
  return Guard([&] {
    Require(preds_path, "preds_path");
    Require(gt, "gt");
    Require(out_json, "out_json");
    EvalProtocol protocol;
    protocol.task = ParseEvalTask(task ? task : "e2e");
    protocol.iou_threshold = iou_threshold;
    if (lexicon_path) protocol.lexicon = LoadLexicon(lexicon_path);
    protocol.Validate(&gt->alphabet);
    const auto preds = LoadPredictionsOrScenes(preds_path, *gt);
    std::vector<SceneDetections> truth;
    for (const auto& s : gt->scenes) {
      truth.push_back(GroundTruthAsDetections(s, gt->alphabet));
    }
    const EvalReport r = Evaluate(preds, truth, protocol);
    ojson j;
    j["task"] = std::string(ToString(protocol.task));
    j["iou_threshold"] = protocol.iou_threshold;
    j["lexicon"] = lexicon_path != nullptr;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f"] = r.f_measure;
    j["true_positives"] = r.true_positives;
    j["num_preds"] = r.num_preds;
    j["num_gts"] = r.num_gts;
    ojson per_scene = ojson::array();
    for (const auto& s : r.scenes) {
      per_scene.push_back({{"scene_id", s.scene_id},
                           {"true_positives", s.true_positives},
                           {"num_preds", s.num_preds},
                           {"num_gts", s.num_gts}});
    }
    j["scenes"] = std::move(per_scene);
    *out_json = Dup(j.dump(2));
  });
}

ts_status ts_run_experiment(const ts_config* cfg, const char* name,
                            int include_timing, char** out_jsonl) {
  return Guard([&] {
    Require(cfg, "cfg");
    Require(name, "name");
    Require(out_jsonl, "out_jsonl");
    const auto report = gym::RunExperiment(name, cfg->value);
    *out_jsonl = Dup(report.ToJsonLines(include_timing != 0));
  });
}

}  // extern "C"
