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

#ifndef TEXTSPOT_SPOTLOSS_HPP_
#define TEXTSPOT_SPOTLOSS_HPP_

#include <array>
#include <span>
#include <vector>

#include "textspot/spotcost.hpp"

namespace textspot {

struct LossWeights {
  double beta_class = 1.0;
  double beta_l1 = 5.0;
  double beta_giou = 2.0;
  double beta_rec = 1.0;
  // Down-weights the no-object classification term of unmatched queries.
  double noobj_coef = 0.1;
  bool normalize_rec_length = false;

  void Validate() const;
};

// Components are unweighted sums over the scene; `classification` already
// includes noobj_coef on unmatched predictions.
struct LossBreakdown {
  double total = 0.0;
  double classification = 0.0;
  double box_l1 = 0.0;
  double box_giou = 0.0;  // sum of (1 - giou)
  double recognition = 0.0;
  MatchResult matching;
};

struct PredictionGradient {
  std::array<double, 2> class_logits{0.0, 0.0};
  std::array<double, 4> box{0.0, 0.0, 0.0, 0.0};  // center-size parameters
  Matrix char_logits;
};

struct LossAndGradients {
  LossBreakdown loss;
  std::vector<PredictionGradient> grads;  // one per prediction
};

// Which loss terms a mode trains. The box term is skipped in weak mode; the
// recognition term is always present (zero it with beta_rec).
inline bool TrainsBox(MatchMode mode) { return mode != MatchMode::kWeak; }

// Matches under `mode` and evaluates the loss at that matching. NoObject
// ground-truth entries are ignored.
LossBreakdown HungarianLoss(std::span<const Prediction> preds,
                            std::span<const GroundTruthInstance> gts,
                            const CostWeights& cost_weights,
                            const LossWeights& loss_weights, MatchMode mode);

// As HungarianLoss, plus gradients of the total with respect to every
// prediction parameter. The matching is held constant.
LossAndGradients LossGradients(std::span<const Prediction> preds,
                               std::span<const GroundTruthInstance> gts,
                               const CostWeights& cost_weights,
                               const LossWeights& loss_weights, MatchMode mode);

// Loss and gradients at a caller-supplied matching of the text instances.
LossAndGradients LossAtMatching(std::span<const Prediction> preds,
                                std::span<const GroundTruthInstance> gts,
                                const MatchResult& matching,
                                const LossWeights& loss_weights,
                                MatchMode mode, bool want_gradients = true);

}  // namespace textspot

#endif  // TEXTSPOT_SPOTLOSS_HPP_
