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

#include "textspot/spotloss.hpp"

#include <cmath>

#include "textspot/error.hpp"

namespace textspot {
namespace {

std::vector<GroundTruthInstance> TextInstances(
    std::span<const GroundTruthInstance> gts) {
  std::vector<GroundTruthInstance> out;
  for (const auto& gt : gts) {
    if (gt.cls == ObjectClass::kText) out.push_back(gt);
  }
  return out;
}

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void LossWeights::Validate() const {
  const double ws[] = {beta_class, beta_l1, beta_giou, beta_rec};
  for (double w : ws) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("loss weights must be finite and non-negative");
    }
  }
  if (!(noobj_coef > 0.0) || noobj_coef > 1.0) {
    throw ValidationError("noobj_coef must lie in (0, 1]");
  }
}

LossAndGradients LossAtMatching(std::span<const Prediction> preds,
                                std::span<const GroundTruthInstance> gts,
                                const MatchResult& matching,
                                const LossWeights& lw, MatchMode mode,
                                bool want_gradients) {
  const auto text = TextInstances(gts);
  if (matching.assignment.size() != text.size()) {
    throw ArgumentError("matching does not cover the text instances");
  }
  // matched_gt[j] = ground-truth row matched to prediction j, or -1.
  std::vector<long> matched_gt(preds.size(), -1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const std::size_t j = matching.assignment[i];
    if (j >= preds.size() || matched_gt[j] >= 0) {
      throw ArgumentError("matching is not injective into predictions");
    }
    matched_gt[j] = static_cast<long>(i);
  }

  LossAndGradients out;
  out.loss.matching = matching;
  auto& loss = out.loss;
  if (want_gradients) out.grads.resize(preds.size());

  // Accumulate in prediction order so the result only depends on which
  // ground-truth content each prediction is matched to.
  for (std::size_t j = 0; j < preds.size(); ++j) {
    const Prediction& pred = preds[j];
    PredictionGradient* grad = want_gradients ? &out.grads[j] : nullptr;
    if (grad) grad->char_logits = Matrix(pred.char_logits.rows,
                                         pred.char_logits.cols);
    const double margin = pred.class_logits[1] - pred.class_logits[0];

    if (matched_gt[j] < 0) {
      // -log p(NoObject) = softplus(z_text - z_noobj)
      loss.classification += lw.noobj_coef * Softplus(-margin);
      if (grad) {
        const double p_text = Sigmoid(-margin);
        const double g = lw.beta_class * lw.noobj_coef * p_text;
        grad->class_logits = {g, -g};
      }
      continue;
    }

    const auto& gt = text[static_cast<std::size_t>(matched_gt[j])];
    loss.classification += Softplus(margin);
    if (grad) {
      const double p_noobj = Sigmoid(margin);
      const double g = lw.beta_class * p_noobj;
      grad->class_logits = {-g, g};
    }

    if (TrainsBox(mode)) {
      if (!gt.box) throw ValidationError("box loss needs ground-truth boxes");
      const Box& pb = pred.box;
      const Box& gb = *gt.box;
      for (int k = 0; k < 4; ++k) {
        loss.box_l1 += std::abs(pb.v[k] - gb.v[k]);
        if (grad) grad->box[k] += lw.beta_l1 * Sign(pb.v[k] - gb.v[k]);
      }
      const auto gg = GiouAndGradient(Convert(pb, BoxFormat::kCorner),
                                      Convert(gb, BoxFormat::kCorner));
      loss.box_giou += 1.0 - gg.giou;
      if (grad) {
        // Chain (x1, y1, x2, y2) back to (cx, cy, w, h); loss is 1 - giou.
        const auto& d = gg.d_first;
        const double s = -lw.beta_giou;
        grad->box[0] += s * (d[0] + d[2]);
        grad->box[1] += s * (d[1] + d[3]);
        grad->box[2] += s * 0.5 * (d[2] - d[0]);
        grad->box[3] += s * 0.5 * (d[3] - d[1]);
      }
    }

    if (!gt.transcription) {
      throw ValidationError("recognition loss needs transcriptions");
    }
    if (grad) {
      loss.recognition += RecognitionCostAndGradient(
          pred.char_logits, *gt.transcription, 1.0, lw.normalize_rec_length,
          grad->char_logits);
      if (lw.beta_rec != 1.0) {
        for (double& g : grad->char_logits.data) g *= lw.beta_rec;
      }
    } else {
      loss.recognition += RecognitionCost(pred.char_logits, *gt.transcription,
                                          1.0, lw.normalize_rec_length);
    }
  }
  loss.total = lw.beta_class * loss.classification + lw.beta_l1 * loss.box_l1 +
               lw.beta_giou * loss.box_giou + lw.beta_rec * loss.recognition;
  return out;
}

LossBreakdown HungarianLoss(std::span<const Prediction> preds,
                            std::span<const GroundTruthInstance> gts,
                            const CostWeights& cost_weights,
                            const LossWeights& loss_weights, MatchMode mode) {
  const auto text = TextInstances(gts);
  const MatchResult matching =
      MatchPredictions(preds, text, cost_weights, mode);
  return LossAtMatching(preds, text, matching, loss_weights, mode, false).loss;
}

LossAndGradients LossGradients(std::span<const Prediction> preds,
                               std::span<const GroundTruthInstance> gts,
                               const CostWeights& cost_weights,
                               const LossWeights& loss_weights,
                               MatchMode mode) {
  const auto text = TextInstances(gts);
  const MatchResult matching =
      MatchPredictions(preds, text, cost_weights, mode);
  return LossAtMatching(preds, text, matching, loss_weights, mode, true);
}

}  // namespace textspot
