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

#include "textspot/spotcost.hpp"

#include <algorithm>
#include <cmath>

#include "textspot/error.hpp"

namespace textspot {
namespace {

double LogSumExp(std::span<const double> row) {
  const double peak = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double x : row) sum += std::exp(x - peak);
  return peak + std::log(sum);
}

void CheckWordFits(const Matrix& char_logits, const Transcription& gt) {
  if (gt.symbols.size() + 1 > char_logits.rows) {
    throw ArgumentError("word of length " + std::to_string(gt.symbols.size()) +
                        " plus EOS exceeds " +
                        std::to_string(char_logits.rows) + " decoding steps");
  }
}

}  // namespace

void CostWeights::Validate() const {
  const double ws[] = {alpha_class, alpha_l1, alpha_giou, alpha_rec};
  for (double w : ws) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("cost weights must be finite and non-negative");
    }
  }
  if (alpha_class + alpha_l1 + alpha_giou + alpha_rec == 0.0) {
    throw ValidationError("cost weights are all zero");
  }
}

std::string_view ToString(MatchMode mode) {
  switch (mode) {
    case MatchMode::kFull:
      return "full";
    case MatchMode::kWeak:
      return "weak";
    case MatchMode::kDetClsOnly:
      return "detcls";
  }
  return "?";
}

MatchMode ParseMatchMode(std::string_view name) {
  if (name == "full") return MatchMode::kFull;
  if (name == "weak") return MatchMode::kWeak;
  if (name == "detcls") return MatchMode::kDetClsOnly;
  throw ArgumentError("unknown match mode '" + std::string(name) +
                      "' (expected full, weak or detcls)");
}

double ClassificationCost(const Prediction& pred, ObjectClass cls,
                          double alpha_class) {
  if (alpha_class == 0.0) return 0.0;
  const double p_text = TextProbability(pred);
  const double p = cls == ObjectClass::kText ? p_text : 1.0 - p_text;
  return -alpha_class * p;
}

double BoxCost(const Box& pred_box, const Box& gt_box, const CostWeights& w) {
  double l1 = 0.0;
  for (int k = 0; k < 4; ++k) l1 += std::abs(pred_box.v[k] - gt_box.v[k]);
  double cost = w.alpha_l1 * l1;
  if (w.alpha_giou != 0.0) {
    const double g = Giou(Convert(pred_box, BoxFormat::kCorner),
                          Convert(gt_box, BoxFormat::kCorner));
    cost += w.alpha_giou * (1.0 - g);
  }
  return cost;
}

double RecognitionCost(const Matrix& char_logits, const Transcription& gt,
                       double weight, bool normalize_length) {
  CheckWordFits(char_logits, gt);
  const std::size_t steps = gt.symbols.size() + 1;
  const int eos = static_cast<int>(char_logits.cols) - 2;
  double nll = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    const int target = j < gt.symbols.size() ? gt.symbols[j] : eos;
    auto row = char_logits.row(j);
    nll += LogSumExp(row) - row[static_cast<std::size_t>(target)];
  }
  if (normalize_length) nll /= static_cast<double>(steps);
  return weight * nll;
}

double RecognitionCostAndGradient(const Matrix& char_logits,
                                  const Transcription& gt, double weight,
                                  bool normalize_length, Matrix& grad) {
  CheckWordFits(char_logits, gt);
  const std::size_t steps = gt.symbols.size() + 1;
  const int eos = static_cast<int>(char_logits.cols) - 2;
  const double scale =
      normalize_length ? weight / static_cast<double>(steps) : weight;
  double nll = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    const auto target = static_cast<std::size_t>(
        j < gt.symbols.size() ? gt.symbols[j] : eos);
    auto row = char_logits.row(j);
    const double lse = LogSumExp(row);
    nll += lse - row[target];
    auto g = grad.row(j);
    for (std::size_t c = 0; c < row.size(); ++c) {
      g[c] += scale * std::exp(row[c] - lse);
    }
    g[target] -= scale;
  }
  if (normalize_length) nll /= static_cast<double>(steps);
  return weight * nll;
}

SpotCostMatrix BuildCostMatrix(std::span<const Prediction> preds,
                               std::span<const GroundTruthInstance> gts,
                               const CostWeights& weights, MatchMode mode) {
  if (gts.size() > preds.size()) {
    throw CapacityError(std::to_string(gts.size()) +
                        " ground-truth words exceed " +
                        std::to_string(preds.size()) +
                        " predictions; raise the query count N");
  }
  for (const auto& gt : gts) {
    if (gt.cls != ObjectClass::kText) {
      throw ValidationError("matching expects text instances only");
    }
    if (!gt.transcription && UsesRecognition(mode)) {
      throw ValidationError("recognition matching needs transcriptions");
    }
    if (!gt.box && UsesBox(mode)) {
      throw ValidationError(std::string("mode ") +
                            std::string(ToString(mode)) +
                            " needs ground-truth boxes");
    }
  }
  const std::size_t m = gts.size();
  const std::size_t n = preds.size();
  SpotCostMatrix out{CostMatrix(m, n), CostMatrix(m, n), CostMatrix(m, n),
                     CostMatrix(m, n)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double cls =
          ClassificationCost(preds[j], ObjectClass::kText, weights.alpha_class);
      const double box =
          UsesBox(mode) ? BoxCost(preds[j].box, *gts[i].box, weights) : 0.0;
      const double rec =
          UsesRecognition(mode)
              ? RecognitionCost(preds[j].char_logits, *gts[i].transcription,
                                weights.alpha_rec,
                                weights.normalize_rec_length)
              : 0.0;
      out.classification(i, j) = cls;
      out.box(i, j) = box;
      out.recognition(i, j) = rec;
      out.total(i, j) = cls + box + rec;
    }
  }
  return out;
}

MatchResult MatchPredictions(std::span<const Prediction> preds,
                             std::span<const GroundTruthInstance> gts,
                             const CostWeights& weights, MatchMode mode) {
  const SpotCostMatrix costs = BuildCostMatrix(preds, gts, weights, mode);
  MatchResult result = SolveAssignment(costs.total);
  for (auto& pair : result.pairs) {
    pair.classification = costs.classification(pair.row, pair.col);
    pair.box = costs.box(pair.row, pair.col);
    pair.recognition = costs.recognition(pair.row, pair.col);
  }
  return result;
}

}  // namespace textspot
