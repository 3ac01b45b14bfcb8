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

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "textspot/error.hpp"
#include "textspot/toygym.hpp"

namespace textspot::gym {
namespace {

struct SeedData {
  std::vector<Scene> a_train;
  std::vector<Scene> a_test;
  std::vector<Scene> b_train_full;
  std::vector<Scene> b_train_weak;
  std::vector<Scene> b_test;
};

SeedData MakeData(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& w = cfg.world;
  const std::uint64_t base = seed * 16;
  SeedData d;
  d.a_train = GenerateScenes(w, Domain::kA, Supervision::kFull,
                             cfg.train_scenes, base + 1, "a_train_");
  d.a_test = GenerateScenes(w, Domain::kA, Supervision::kFull, cfg.test_scenes,
                            base + 2, "a_test_");
  // Same seeds for both B variants: identical scenes, boxes stripped in one.
  d.b_train_full = GenerateScenes(w, Domain::kB, Supervision::kFull,
                                  cfg.train_scenes, base + 3, "b_train_");
  d.b_train_weak = GenerateScenes(w, Domain::kB, Supervision::kWeak,
                                  cfg.train_scenes, base + 3, "b_train_");
  d.b_test = GenerateScenes(w, Domain::kB, Supervision::kFull, cfg.test_scenes,
                            base + 4, "b_test_");
  return d;
}

class ArmTimer {
 public:
  ArmTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

void ExperimentConfig::Validate() const {
  world.Validate();
  train.Validate();
  model_shape().Validate();
  if (pretrain_epochs == 0 || finetune_epochs == 0) {
    throw ValidationError("experiment epochs must be >= 1");
  }
  if (!(finetune_learning_rate >= 0.0) || !std::isfinite(finetune_learning_rate)) {
    throw ValidationError("experiment.finetune_learning_rate must be finite and >= 0");
  }
  if (train_scenes == 0 || test_scenes == 0) {
    throw ValidationError("experiment scene counts must be >= 1");
  }
  if (seeds.empty()) throw ValidationError("experiment needs at least one seed");
  if (!(score_threshold >= 0.0) || score_threshold > 1.0) {
    throw ValidationError("score_threshold must lie in [0, 1]");
  }
  EvalProtocol protocol;
  protocol.iou_threshold = iou_threshold;
  protocol.Validate();
}

const ArmResult& ExperimentReport::Find(std::string_view arm,
                                        std::uint64_t seed) const {
  for (const auto& a : arms) {
    if (a.arm == arm && a.seed == seed) return a;
  }
  throw ArgumentError("no arm '" + std::string(arm) + "' for seed " +
                      std::to_string(seed));
}

std::string ExperimentReport::ToJsonLines(bool include_timing) const {
  std::string out;
  for (const auto& a : arms) {
    nlohmann::ordered_json j;
    j["experiment"] = a.experiment;
    j["arm"] = a.arm;
    j["seed"] = a.seed;
    j["task"] = a.task;
    j["precision"] = a.precision;
    j["recall"] = a.recall;
    j["f"] = a.f_measure;
    j["epochs"] = a.epochs;
    j["final_loss"] = a.final_loss;
    if (include_timing) j["wall_seconds"] = a.wall_seconds;
    out += j.dump();
    out += '\n';
  }
  return out;
}

EvalReport EvaluateModel(const ToyModel& model, const std::vector<Scene>& scenes,
                         const Alphabet& alphabet, EvalTask task,
                         double score_threshold, double iou_threshold) {
  std::vector<SceneDetections> preds, gts;
  for (const auto& scene : scenes) {
    preds.push_back(Detect(model, scene, alphabet, score_threshold));
    gts.push_back(GroundTruthAsDetections(scene, alphabet));
  }
  EvalProtocol protocol;
  protocol.task = task;
  protocol.iou_threshold = iou_threshold;
  return Evaluate(preds, gts, protocol);
}

ExperimentReport RunExperiment(std::string_view name,
                               const ExperimentConfig& cfg) {
  bool known = false;
  for (auto n : kExperimentNames) known = known || n == name;
  if (!known) {
    throw ArgumentError("unknown experiment '" + std::string(name) +
                        "' (expected weak_vs_synthetic, detection_ablation or "
                        "matching_ablation)");
  }
  cfg.Validate();
  const Alphabet alphabet = cfg.world.MakeAlphabet();
  const ModelShape shape = cfg.model_shape();

  ExperimentReport report;
  report.name = std::string(name);

  auto record = [&](std::string arm, std::uint64_t seed, const TrainResult& r,
                    std::size_t epochs, const std::vector<Scene>& test,
                    EvalTask task, const ArmTimer& timer) {
    const EvalReport eval = EvaluateModel(r.model, test, alphabet, task,
                                          cfg.score_threshold,
                                          cfg.iou_threshold);
    ArmResult a;
    a.experiment = report.name;
    a.arm = std::move(arm);
    a.seed = seed;
    a.task = std::string(ToString(task));
    a.precision = eval.precision;
    a.recall = eval.recall;
    a.f_measure = eval.f_measure;
    a.epochs = epochs;
    a.final_loss = r.loss_history.empty() ? 0.0 : r.loss_history.back();
    a.wall_seconds = timer.seconds();
    report.arms.push_back(std::move(a));
  };

  for (std::uint64_t seed : cfg.seeds) {
    const SeedData data = MakeData(cfg, seed);
    const ToyModel init = ToyModel::Init(shape, seed);
    TrainConfig tc = cfg.train;
    tc.seed = seed;

    if (name == "weak_vs_synthetic") {
      ArmTimer t_syn;
      tc.mode = TrainMode::kFull;
      tc.epochs = cfg.pretrain_epochs;
      const TrainResult synthetic = Train(init, data.a_train, tc);
      record("synthetic", seed, synthetic, tc.epochs, data.b_test,
             EvalTask::kEndToEnd, t_syn);

      ArmTimer t_weak;
      TrainConfig ft = tc;
      ft.epochs = cfg.finetune_epochs;
      ft.learning_rate = cfg.finetune_learning_rate;
      ft.mode = TrainMode::kWeak;
      const TrainResult weak = Train(synthetic.model, data.b_train_weak, ft);
      record("weak", seed, weak, ft.epochs, data.b_test, EvalTask::kEndToEnd,
             t_weak);

      ArmTimer t_box;
      ft.mode = TrainMode::kFull;
      const TrainResult box = Train(synthetic.model, data.b_train_full, ft);
      record("box", seed, box, ft.epochs, data.b_test, EvalTask::kEndToEnd,
             t_box);
    } else if (name == "detection_ablation") {
      tc.epochs = cfg.pretrain_epochs;
      ArmTimer t_det;
      tc.mode = TrainMode::kDetOnly;
      const TrainResult det = Train(init, data.a_train, tc);
      record("det_only", seed, det, tc.epochs, data.a_test,
             EvalTask::kDetection, t_det);
      ArmTimer t_full;
      tc.mode = TrainMode::kFull;
      const TrainResult full = Train(init, data.a_train, tc);
      record("det_rec", seed, full, tc.epochs, data.a_test,
             EvalTask::kDetection, t_full);
    } else {
      tc.epochs = cfg.pretrain_epochs;
      tc.mode = TrainMode::kFull;
      ArmTimer t_plain;
      TrainConfig plain = tc;
      plain.cost.alpha_rec = 0.0;
      const TrainResult without = Train(init, data.a_train, plain);
      record("det_cls_matching", seed, without, tc.epochs, data.a_test,
             EvalTask::kEndToEnd, t_plain);
      ArmTimer t_rec;
      const TrainResult with = Train(init, data.a_train, tc);
      record("rec_matching", seed, with, tc.epochs, data.a_test,
             EvalTask::kEndToEnd, t_rec);
    }
  }
  return report;
}

}  // namespace textspot::gym
