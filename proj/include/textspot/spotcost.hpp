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

#ifndef TEXTSPOT_SPOTCOST_HPP_
#define TEXTSPOT_SPOTCOST_HPP_

#include <span>
#include <string>
#include <string_view>

#include "textspot/assignment.hpp"
#include "textspot/domain.hpp"

namespace textspot {

// Matching-criterion weights. The box weight is split into its L1 and GIoU
// parts.
struct CostWeights {
  double alpha_class = 2.0;
  double alpha_l1 = 5.0;
  double alpha_giou = 2.0;
  double alpha_rec = 1.0;
  // Divide the recognition cross entropy by the number of scored steps.
  bool normalize_rec_length = false;

  void Validate() const;
};

enum class MatchMode {
  kFull,        // classification + box + recognition
  kWeak,        // classification + recognition, no box term
  kDetClsOnly,  // classification + box
};

std::string_view ToString(MatchMode mode);
MatchMode ParseMatchMode(std::string_view name);

inline bool UsesBox(MatchMode mode) { return mode != MatchMode::kWeak; }
inline bool UsesRecognition(MatchMode mode) {
  return mode != MatchMode::kDetClsOnly;
}

// -alpha_c * p(cls).
double ClassificationCost(const Prediction& pred, ObjectClass cls,
                          double alpha_class);

// alpha_l1 * |b - b'|_1 on center-size parameters plus
// alpha_giou * (1 - giou) on corners. Both boxes center-size normalized.
double BoxCost(const Box& pred_box, const Box& gt_box, const CostWeights& w);

// Sum over the word's characters and the terminating EOS of the negative
// log-softmax of the target, scaled by `weight`. Steps after EOS are ignored.
double RecognitionCost(const Matrix& char_logits, const Transcription& gt,
                       double weight, bool normalize_length = false);

// Same quantity plus d/d char_logits (accumulated into `grad`, same shape).
double RecognitionCostAndGradient(const Matrix& char_logits,
                                  const Transcription& gt, double weight,
                                  bool normalize_length, Matrix& grad);

struct SpotCostMatrix {
  CostMatrix total;
  CostMatrix classification;
  CostMatrix box;
  CostMatrix recognition;
};

// Rows are ground-truth text instances, columns predictions. Throws
// CapacityError when there are more instances than predictions.
SpotCostMatrix BuildCostMatrix(std::span<const Prediction> preds,
                               std::span<const GroundTruthInstance> gts,
                               const CostWeights& weights, MatchMode mode);

// BuildCostMatrix followed by SolveAssignment, with per-pair breakdown.
MatchResult MatchPredictions(std::span<const Prediction> preds,
                             std::span<const GroundTruthInstance> gts,
                             const CostWeights& weights, MatchMode mode);

}  // namespace textspot

#endif  // TEXTSPOT_SPOTCOST_HPP_
