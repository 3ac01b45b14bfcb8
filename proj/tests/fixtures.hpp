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

// Shared test inputs: random predictions and ground truth, and the
// recognition-aware matching fixture with prescribed component costs.
#ifndef TEXTSPOT_TESTS_FIXTURES_HPP_
#define TEXTSPOT_TESTS_FIXTURES_HPP_

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "textspot/domain.hpp"
#include "textspot/spotcost.hpp"
#include "textspot/spotloss.hpp"

namespace fixtures {

using namespace textspot;

inline Prediction RandomPrediction(std::mt19937_64& rng, std::size_t steps,
                                   std::size_t classes) {
  std::uniform_real_distribution<double> logit(-3.0, 3.0);
  std::uniform_real_distribution<double> center(0.2, 0.8), extent(0.05, 0.35);
  Prediction p;
  p.class_logits = {logit(rng), logit(rng)};
  p.box = Box::CenterSize(center(rng), center(rng), extent(rng), extent(rng));
  p.char_logits = Matrix(steps, classes);
  for (double& x : p.char_logits.data) x = logit(rng);
  return p;
}

inline Transcription RandomWord(std::mt19937_64& rng, std::size_t symbols,
                                std::size_t max_chars) {
  std::uniform_int_distribution<std::size_t> len(1, max_chars);
  std::uniform_int_distribution<int> sym(0, static_cast<int>(symbols) - 1);
  Transcription t;
  const std::size_t n = len(rng);
  for (std::size_t k = 0; k < n; ++k) t.symbols.push_back(sym(rng));
  return t;
}

inline GroundTruthInstance RandomGroundTruth(std::mt19937_64& rng,
                                             std::size_t symbols,
                                             std::size_t max_chars,
                                             bool with_box) {
  std::uniform_real_distribution<double> center(0.2, 0.8), extent(0.05, 0.35);
  GroundTruthInstance g =
      GroundTruthInstance::Text(RandomWord(rng, symbols, max_chars));
  if (with_box) {
    g.box = Box::CenterSize(center(rng), center(rng), extent(rng), extent(rng));
  }
  return g;
}

struct Instance {
  std::vector<Prediction> preds;
  std::vector<GroundTruthInstance> gts;
};

// l = symbols + 2 classes per step.
inline Instance RandomInstance(std::mt19937_64& rng, MatchMode mode,
                               std::size_t num_preds = 5,
                               std::size_t symbols = 4, std::size_t steps = 6) {
  std::uniform_int_distribution<std::size_t> count(0, num_preds);
  Instance inst;
  for (std::size_t n = 0; n < num_preds; ++n) {
    inst.preds.push_back(RandomPrediction(rng, steps, symbols + 2));
  }
  const std::size_t m = count(rng);
  for (std::size_t i = 0; i < m; ++i) {
    inst.gts.push_back(
        RandomGroundTruth(rng, symbols, steps - 1, mode != MatchMode::kWeak));
  }
  return inst;
}

// True when some prediction/ground-truth box pair lies within `margin` of a
// point where the box loss is not differentiable: equal center-size
// coordinates (L1) or coinciding corner edges (intersection and hull).
inline bool NearBoxKink(const Instance& inst, double margin) {
  for (const auto& p : inst.preds) {
    const auto pc = oracle::FromCenter(p.box.v[0], p.box.v[1], p.box.v[2], p.box.v[3]);
    for (const auto& g : inst.gts) {
      if (!g.box) continue;
      for (int k = 0; k < 4; ++k) {
        if (std::abs(p.box.v[k] - g.box->v[k]) < margin) return true;
      }
      const auto gc = oracle::FromCenter(g.box->v[0], g.box->v[1], g.box->v[2], g.box->v[3]);
      for (int axis = 0; axis < 2; ++axis) {
        for (int i : {axis, axis + 2}) {
          for (int j : {axis, axis + 2}) {
            if (std::abs(pc[i] - gc[j]) < margin) return true;
          }
        }
      }
    }
  }
  return false;
}

// RandomInstance redrawn until it is at least `margin` away from every box
// kink, so central differences are a valid reference. `redraws` counts the
// rejected draws.
inline Instance RandomSmoothInstance(std::mt19937_64& rng, MatchMode mode,
                                     double margin, int* redraws = nullptr) {
  for (;;) {
    Instance inst = RandomInstance(rng, mode);
    if (!NearBoxKink(inst, margin)) return inst;
    if (redraws) ++*redraws;
  }
}

// Flattened prediction parameters: class logits, box, char logits.
inline std::vector<double> Flatten(const std::vector<Prediction>& preds) {
  std::vector<double> x;
  for (const auto& p : preds) {
    x.insert(x.end(), p.class_logits.begin(), p.class_logits.end());
    x.insert(x.end(), p.box.v.begin(), p.box.v.end());
    x.insert(x.end(), p.char_logits.data.begin(), p.char_logits.data.end());
  }
  return x;
}

inline std::vector<Prediction> Unflatten(const std::vector<Prediction>& shape,
                                         std::span<const double> x) {
  std::vector<Prediction> out = shape;
  std::size_t k = 0;
  for (auto& p : out) {
    for (double& v : p.class_logits) v = x[k++];
    for (double& v : p.box.v) v = x[k++];
    for (double& v : p.char_logits.data) v = x[k++];
  }
  return out;
}

inline std::vector<double> FlattenGradients(
    const std::vector<PredictionGradient>& grads) {
  std::vector<double> g;
  for (const auto& p : grads) {
    g.insert(g.end(), p.class_logits.begin(), p.class_logits.end());
    g.insert(g.end(), p.box.begin(), p.box.end());
    g.insert(g.end(), p.char_logits.data.begin(), p.char_logits.data.end());
  }
  return g;
}

// Logits giving cross entropy `ce` at `target` over `classes` outcomes: the
// target logit is 0 and every other logit is x with
// ln(1 + (classes - 1) e^x) = ce.
inline void SetStepCrossEntropy(Matrix& logits, std::size_t step, int target,
                                double ce) {
  const double x =
      std::log(std::expm1(ce) / static_cast<double>(logits.cols - 1));
  for (std::size_t c = 0; c < logits.cols; ++c) {
    logits(step, c) = static_cast<int>(c) == target ? 0.0 : x;
  }
}

// Horizontal shift of a copy of `gt` whose unit-weight box cost equals `cost`.
inline Box ShiftedBoxWithCost(const Box& gt, double cost) {
  auto cost_at = [&](double dx) {
    const Box moved = Box::CenterSize(gt.v[0] + dx, gt.v[1], gt.v[2], gt.v[3]);
    const auto a = oracle::FromCenter(moved.v[0], moved.v[1], moved.v[2], moved.v[3]);
    const auto b = oracle::FromCenter(gt.v[0], gt.v[1], gt.v[2], gt.v[3]);
    return dx + 1.0 - oracle::Giou(a, b);
  };
  double lo = 0.0, hi = gt.v[2];
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cost_at(mid) < cost ? lo : hi) = mid;
  }
  return Box::CenterSize(gt.v[0] + lo, gt.v[1], gt.v[2], gt.v[3]);
}

// One ground-truth word and two predictions with equal class scores:
// A has box cost 0.2 and recognition cost 8.0, B has 0.5 and 0.5.
struct RecognitionAwareFixture {
  Alphabet alphabet{"ab"};
  std::vector<Prediction> preds;  // {A, B}
  std::vector<GroundTruthInstance> gts;
  CostWeights weights;
};

inline RecognitionAwareFixture MakeRecognitionAwareFixture() {
  RecognitionAwareFixture f;
  f.weights.alpha_class = 1.0;
  f.weights.alpha_l1 = 1.0;
  f.weights.alpha_giou = 1.0;
  f.weights.alpha_rec = 1.0;
  const Box gt_box = Box::CenterSize(0.5, 0.5, 0.2, 0.2);
  const Transcription word = f.alphabet.Encode("ab", 4);
  f.gts.push_back(GroundTruthInstance::Text(word, gt_box));
  const std::size_t steps = 4;
  const std::size_t classes = f.alphabet.size();
  auto make = [&](double box_cost, double rec_cost) {
    Prediction p;
    p.class_logits = {0.0, 0.0};
    p.box = ShiftedBoxWithCost(gt_box, box_cost);
    p.char_logits = Matrix(steps, classes, 0.0);
    const int targets[3] = {word.symbols[0], word.symbols[1], f.alphabet.eos()};
    for (std::size_t j = 0; j < 3; ++j) {
      SetStepCrossEntropy(p.char_logits, j, targets[j], rec_cost / 3.0);
    }
    return p;
  };
  f.preds.push_back(make(0.2, 8.0));
  f.preds.push_back(make(0.5, 0.5));
  return f;
}

}  // namespace fixtures

#endif  // TEXTSPOT_TESTS_FIXTURES_HPP_
