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

#ifndef TEXTSPOT_TOYGYM_HPP_
#define TEXTSPOT_TOYGYM_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "textspot/domain.hpp"
#include "textspot/evalkit.hpp"
#include "textspot/gradkit.hpp"
#include "textspot/spotloss.hpp"

namespace textspot::gym {

// ---------------------------------------------------------------------------
// Synthetic world
// ---------------------------------------------------------------------------

// Domain A plays the fully annotated synthetic data; domain B is the "real"
// data, whose features are a fixed rotation plus bias of domain A's.
enum class Domain { kA, kB };

struct WorldConfig {
  std::size_t grid_rows = 4;
  std::size_t grid_cols = 4;
  std::size_t min_words = 1;
  std::size_t max_words = 4;
  std::size_t min_chars = 2;
  std::size_t max_chars = 5;
  std::string alphabet = "abcdefgh";
  std::size_t max_word_len = kDefaultMaxWordLen;  // recognition steps
  std::size_t feature_dim = 24;
  double noise = 0.1;
  std::size_t num_queries = 8;
  double char_width = 0.04;  // box width per character
  double box_height = 0.12;
  std::uint64_t shift_seed = 7;
  // Domain B rotates random pairs of feature dimensions by this angle.
  double shift_angle = 0.7;
  double shift_bias = 0.5;

  void Validate() const;
  Alphabet MakeAlphabet() const { return Alphabet(alphabet); }
  std::size_t num_locations() const { return grid_rows * grid_cols; }
  std::size_t bits_per_char() const;
};

Scene GenerateScene(const WorldConfig& world, Domain domain,
                    Supervision supervision, std::uint64_t seed,
                    std::string scene_id);

// `count` scenes with seeds derived from `seed`; ids are prefix + index.
std::vector<Scene> GenerateScenes(const WorldConfig& world, Domain domain,
                                  Supervision supervision, std::size_t count,
                                  std::uint64_t seed, std::string_view prefix);

// The fixed orthogonal matrix of the domain shift.
Matrix DomainRotation(const WorldConfig& world);

// ---------------------------------------------------------------------------
// Toy model: attention encoder producing one joint embedding per query, shared
// by a 3-layer detection FFN, a linear classifier and a recurrent recognizer.
// ---------------------------------------------------------------------------

struct ModelShape {
  std::size_t feature_dim = 24;
  std::size_t num_locations = 16;
  std::size_t grid_rows = 4;
  std::size_t grid_cols = 4;
  std::size_t num_queries = 8;
  std::size_t key_dim = 16;
  std::size_t d_emb = 32;
  std::size_t hidden = 32;
  std::size_t alphabet_size = 10;  // symbols + EOS + PAD
  std::size_t max_word_len = kDefaultMaxWordLen;

  std::size_t pos_dim() const { return 2 + grid_rows + grid_cols; }
  void Validate() const;
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

ModelShape ShapeFor(const WorldConfig& world, std::size_t d_emb = 32,
                    std::size_t hidden = 32, std::size_t key_dim = 16);

struct Parameter {
  std::string name;
  Matrix value;
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

class ToyModel {
 public:
  // Scaled-uniform random weights, zero biases.
  static ToyModel Init(const ModelShape& shape, std::uint64_t seed);
  static ToyModel Zeros(const ModelShape& shape);

  const ModelShape& shape() const { return shape_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  const Matrix& param(std::string_view name) const;
  Matrix& param(std::string_view name);

  // Detection-FFN parameters ("det." prefix).
  static bool IsDetectionParam(std::string_view name);

  friend bool operator==(const ToyModel&, const ToyModel&) = default;

 private:
  explicit ToyModel(const ModelShape& shape);
  ModelShape shape_;
  std::vector<Parameter> params_;
};

// Forward pass recorded on a tape; parameters are the first leaves, in the
// order of ToyModel::params().
struct ForwardGraph {
  grad::Tape tape;
  std::vector<grad::NodeId> params;
  grad::NodeId class_logits = 0;           // N x 2
  grad::NodeId boxes = 0;                  // N x 4, sigmoid outputs
  std::vector<grad::NodeId> char_logits;   // per step, N x l
};

ForwardGraph BuildForward(const ToyModel& model, const Matrix& features);
std::vector<Prediction> Predictions(const ForwardGraph& graph,
                                    const ModelShape& shape);

// Exactly num_queries predictions; throws ArgumentError on a feature shape
// mismatch.
std::vector<Prediction> ModelForward(const ToyModel& model,
                                     const Scene& scene);

// Detections with p(Text) >= score_threshold, greedily decoded.
SceneDetections Detect(const ToyModel& model, const Scene& scene,
                       const Alphabet& alphabet, double score_threshold = 0.5);

void SaveCheckpoint(const std::filesystem::path& path, const ToyModel& model);
ToyModel LoadCheckpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class TrainMode {
  kFull,
  kWeak,
  kDetClsOnly,  // matching without recognition, loss with it
  kDetOnly,     // no recognition in matching or loss
};

std::string_view ToString(TrainMode mode);
TrainMode ParseTrainMode(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.005;
  std::size_t epochs = 250;
  std::size_t batch_size = 4;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::kFull;
  CostWeights cost;
  LossWeights loss;

  void Validate() const;
  MatchMode match_mode() const;
  LossWeights effective_loss() const;
};

struct SceneGradient {
  LossBreakdown loss;
  std::vector<Matrix> grads;  // aligned with ToyModel::params()
};

// Loss of one scene and its gradient with respect to every model weight,
// with the matching held fixed.
SceneGradient ComputeSceneGradient(const ToyModel& model, const Scene& scene,
                                   const TrainConfig& config);

// Scene loss evaluated from scratch (matching recomputed).
double SceneLoss(const ToyModel& model, const Scene& scene,
                 const TrainConfig& config);

struct TrainResult {
  ToyModel model;
  std::vector<double> loss_history;  // mean scene loss per epoch
};

// Minibatch gradient descent with a constant step. Throws ValidationError
// when a box-supervised mode sees a weak scene.
TrainResult Train(ToyModel model, const std::vector<Scene>& scenes,
                  const TrainConfig& config);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  WorldConfig world;
  std::size_t d_emb = 32;
  std::size_t hidden = 32;
  std::size_t key_dim = 16;
  TrainConfig train;
  std::size_t pretrain_epochs = 150;
  std::size_t finetune_epochs = 150;
  double finetune_learning_rate = 0.002;  // domain-B fine-tuning step
  std::size_t train_scenes = 500;
  std::size_t test_scenes = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double score_threshold = 0.5;
  double iou_threshold = 0.5;
  std::string output_dir = "out";

  void Validate() const;
  ModelShape model_shape() const {
    return ShapeFor(world, d_emb, hidden, key_dim);
  }
};

struct ArmResult {
  std::string experiment;
  std::string arm;
  std::uint64_t seed = 0;
  std::string task;  // evaluation task behind P/R/F
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t epochs = 0;
  double final_loss = 0.0;
  double wall_seconds = 0.0;
};

struct ExperimentReport {
  std::string name;
  std::vector<ArmResult> arms;

  const ArmResult& Find(std::string_view arm, std::uint64_t seed) const;
  // One JSON record per arm. Wall time is the only non-deterministic field.
  std::string ToJsonLines(bool include_timing = true) const;
};

inline constexpr std::string_view kExperimentNames[] = {
    "weak_vs_synthetic", "detection_ablation", "matching_ablation"};

ExperimentReport RunExperiment(std::string_view name,
                               const ExperimentConfig& config);

// Evaluates `model` on fully annotated scenes.
EvalReport EvaluateModel(const ToyModel& model, const std::vector<Scene>& scenes,
                         const Alphabet& alphabet, EvalTask task,
                         double score_threshold, double iou_threshold);

}  // namespace textspot::gym

#endif  // TEXTSPOT_TOYGYM_HPP_
