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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "textspot/error.hpp"
#include "textspot/toygym.hpp"

namespace textspot::gym {
namespace {

bool AllZero(const Matrix& m) {
  return std::all_of(m.data.begin(), m.data.end(),
                     [](double v) { return v == 0.0; });
}

}  // namespace

std::string_view ToString(TrainMode mode) {
  switch (mode) {
    case TrainMode::kFull:
      return "full";
    case TrainMode::kWeak:
      return "weak";
    case TrainMode::kDetClsOnly:
      return "detcls";
    case TrainMode::kDetOnly:
      return "detonly";
  }
  return "?";
}

TrainMode ParseTrainMode(std::string_view name) {
  if (name == "full") return TrainMode::kFull;
  if (name == "weak") return TrainMode::kWeak;
  if (name == "detcls") return TrainMode::kDetClsOnly;
  if (name == "detonly") return TrainMode::kDetOnly;
  throw ArgumentError("unknown train mode '" + std::string(name) +
                      "' (expected full, weak, detcls or detonly)");
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("train.learning_rate must be finite and >= 0");
  }
  if (epochs == 0) throw ValidationError("train.epochs must be >= 1");
  if (batch_size == 0) throw ValidationError("train.batch_size must be >= 1");
  cost.Validate();
  loss.Validate();
}

MatchMode TrainConfig::match_mode() const {
  switch (mode) {
    case TrainMode::kFull:
      return MatchMode::kFull;
    case TrainMode::kWeak:
      return MatchMode::kWeak;
    case TrainMode::kDetClsOnly:
    case TrainMode::kDetOnly:
      return MatchMode::kDetClsOnly;
  }
  return MatchMode::kFull;
}

LossWeights TrainConfig::effective_loss() const {
  LossWeights lw = loss;
  if (mode == TrainMode::kDetOnly) lw.beta_rec = 0.0;
  return lw;
}

SceneGradient ComputeSceneGradient(const ToyModel& model, const Scene& scene,
                                   const TrainConfig& config) {
  ForwardGraph graph = BuildForward(model, scene.features);
  const ModelShape& s = model.shape();
  const auto preds = Predictions(graph, s);
  LossAndGradients lg =
      LossGradients(preds, scene.ground_truth, config.cost,
                    config.effective_loss(), config.match_mode());

  // The loss is linear in the head outputs' upstream gradients, so seeding
  // the tape with sum(output .* dL/doutput) reproduces the chain rule.
  Matrix g_cls(s.num_queries, 2), g_box(s.num_queries, 4);
  std::vector<Matrix> g_char(s.max_word_len,
                             Matrix(s.num_queries, s.alphabet_size));
  for (std::size_t n = 0; n < s.num_queries; ++n) {
    const auto& pg = lg.grads[n];
    g_cls(n, 0) = pg.class_logits[0];
    g_cls(n, 1) = pg.class_logits[1];
    for (std::size_t k = 0; k < 4; ++k) g_box(n, k) = pg.box[k];
    for (std::size_t step = 0; step < s.max_word_len; ++step) {
      for (std::size_t c = 0; c < s.alphabet_size; ++c) {
        g_char[step](n, c) = pg.char_logits(step, c);
      }
    }
  }
  auto& t = graph.tape;
  grad::NodeId surrogate = t.DotConst(graph.class_logits, std::move(g_cls));
  if (!AllZero(g_box)) {
    surrogate = t.Add(surrogate, t.DotConst(graph.boxes, std::move(g_box)));
  }
  for (std::size_t step = 0; step < s.max_word_len; ++step) {
    if (AllZero(g_char[step])) continue;
    surrogate = t.Add(surrogate,
                      t.DotConst(graph.char_logits[step], std::move(g_char[step])));
  }
  auto all = t.Backward(surrogate);

  SceneGradient out;
  out.loss = std::move(lg.loss);
  out.grads.reserve(graph.params.size());
  for (grad::NodeId id : graph.params) out.grads.push_back(std::move(all[id]));
  return out;
}

double SceneLoss(const ToyModel& model, const Scene& scene,
                 const TrainConfig& config) {
  const auto preds = ModelForward(model, scene);
  return HungarianLoss(preds, scene.ground_truth, config.cost,
                       config.effective_loss(), config.match_mode())
      .total;
}

TrainResult Train(ToyModel model, const std::vector<Scene>& scenes,
                  const TrainConfig& config) {
  config.Validate();
  if (config.mode != TrainMode::kWeak) {
    for (const auto& scene : scenes) {
      if (scene.supervision == Supervision::kWeak) {
        throw ValidationError("mode " + std::string(ToString(config.mode)) +
                              " needs box annotations but scene " +
                              scene.scene_id + " is weakly supervised");
      }
    }
  }
  TrainResult result{std::move(model), {}};
  auto& params = result.model.params();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> scene_loss(scenes.size(), 0.0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<Matrix> acc;
      for (std::size_t k = start; k < stop; ++k) {
        SceneGradient sg =
            ComputeSceneGradient(result.model, scenes[order[k]], config);
        scene_loss[order[k]] = sg.loss.total;
        if (acc.empty()) {
          acc = std::move(sg.grads);
        } else {
          for (std::size_t p = 0; p < acc.size(); ++p) {
            for (std::size_t i = 0; i < acc[p].data.size(); ++i) {
              acc[p].data[i] += sg.grads[p].data[i];
            }
          }
        }
      }
      const double step =
          config.learning_rate / static_cast<double>(stop - start);
      for (std::size_t p = 0; p < acc.size(); ++p) {
        auto& w = params[p].value.data;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * acc[p].data[i];
      }
    }
    // Summed in scene order so the record does not depend on the shuffle.
    double total = 0.0;
    for (double l : scene_loss) total += l;
    result.loss_history.push_back(
        scenes.empty() ? 0.0 : total / static_cast<double>(scenes.size()));
  }
  return result;
}

}  // namespace textspot::gym
