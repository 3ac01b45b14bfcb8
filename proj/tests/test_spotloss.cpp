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

#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "textspot/error.hpp"
#include "textspot/gradkit.hpp"
#include "textspot/spotloss.hpp"

using namespace textspot;

namespace {

grad::FiniteDifferenceReport CheckGradients(const fixtures::Instance& inst,
                                            const CostWeights& cw,
                                            const LossWeights& lw,
                                            MatchMode mode) {
  const auto lg = LossGradients(inst.preds, inst.gts, cw, lw, mode);
  const MatchResult matching = lg.loss.matching;
  const auto point = fixtures::Flatten(inst.preds);
  const auto analytic = fixtures::FlattenGradients(lg.grads);
  auto f = [&](std::span<const double> x) {
    const auto preds = fixtures::Unflatten(inst.preds, x);
    return LossAtMatching(preds, inst.gts, matching, lw, mode, false).loss.total;
  };
  return grad::FiniteDifferenceCheck(f, point, analytic, 1e-6);
}

Prediction Perfect(const Alphabet& a, const Transcription& word, const Box& box,
                   std::size_t steps) {
  Prediction p;
  p.class_logits = {20.0, 0.0};
  p.box = box;
  p.char_logits = Matrix(steps, a.size(), 0.0);
  for (std::size_t j = 0; j <= word.symbols.size(); ++j) {
    const int t = j < word.symbols.size() ? word.symbols[j] : a.eos();
    p.char_logits(j, static_cast<std::size_t>(t)) = 20.0;
  }
  return p;
}

}  // namespace

TEST_CASE("no ground truth leaves only the down-weighted no-object term") {
  Prediction p;
  p.class_logits = {0.0, 0.0};
  p.char_logits = Matrix(4, 4);
  const std::vector<Prediction> preds{p};
  const auto loss = HungarianLoss(preds, {}, CostWeights{}, LossWeights{}, MatchMode::kFull);
  CHECK(loss.total == doctest::Approx(0.1 * std::log(2.0)).epsilon(1e-14));
  CHECK(loss.matching.assignment.empty());
}

TEST_CASE("perfect predictions have near-zero loss") {
  const Alphabet a = Alphabet::Default();
  const std::vector<GroundTruthInstance> gts{
      GroundTruthInstance::Text(a.Encode("spot", 16), Box::CenterSize(0.3, 0.3, 0.2, 0.1)),
      GroundTruthInstance::Text(a.Encode("text", 16), Box::CenterSize(0.7, 0.6, 0.3, 0.1))};
  std::vector<Prediction> preds{
      Perfect(a, *gts[1].transcription, *gts[1].box, 16),
      Perfect(a, *gts[0].transcription, *gts[0].box, 16)};
  Prediction empty;
  empty.class_logits = {0.0, 20.0};
  empty.char_logits = Matrix(16, a.size());
  preds.push_back(empty);
  const auto loss = HungarianLoss(preds, gts, CostWeights{}, LossWeights{}, MatchMode::kFull);
  CHECK(loss.total < 1e-6);
  CHECK(loss.matching.assignment == std::vector<std::size_t>{1, 0});
}

TEST_CASE("breakdown sums to the total and components are non-negative") {
  std::mt19937_64 rng(51);
  LossWeights lw;
  lw.beta_class = 1.5;
  lw.beta_rec = 0.7;
  for (auto mode : {MatchMode::kFull, MatchMode::kWeak, MatchMode::kDetClsOnly}) {
    for (int t = 0; t < 100; ++t) {
      const auto inst = fixtures::RandomInstance(rng, mode);
      const auto l = HungarianLoss(inst.preds, inst.gts, CostWeights{}, lw, mode);
      const double sum = lw.beta_class * l.classification + lw.beta_l1 * l.box_l1 +
                         lw.beta_giou * l.box_giou + lw.beta_rec * l.recognition;
      CHECK(std::abs(sum - l.total) <= 1e-9);
      CHECK(l.classification >= 0.0);
      CHECK(l.box_l1 >= 0.0);
      CHECK(l.box_giou >= 0.0);
      CHECK(l.recognition >= 0.0);
      if (mode == MatchMode::kWeak) {
        CHECK(l.box_l1 == 0.0);
        CHECK(l.box_giou == 0.0);
      }
    }
  }
}

TEST_CASE("weak mode ignores boxes even when present") {
  std::mt19937_64 rng(52);
  const auto inst = fixtures::RandomInstance(rng, MatchMode::kFull, 5);
  const auto lg = LossGradients(inst.preds, inst.gts, CostWeights{}, LossWeights{},
                                MatchMode::kWeak);
  CHECK(lg.loss.box_l1 == 0.0);
  for (const auto& g : lg.grads) {
    for (double v : g.box) CHECK(v == 0.0);
  }
}

TEST_CASE("classification-only weights give zero character gradients") {
  std::mt19937_64 rng(53);
  LossWeights lw{1.0, 0.0, 0.0, 0.0, 0.1, false};
  for (int t = 0; t < 20; ++t) {
    const auto inst = fixtures::RandomInstance(rng, MatchMode::kFull);
    const auto lg = LossGradients(inst.preds, inst.gts, CostWeights{}, lw, MatchMode::kFull);
    for (const auto& g : lg.grads) {
      for (double v : g.char_logits.data) CHECK(v == 0.0);
      for (double v : g.box) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(54);
  for (auto mode : {MatchMode::kFull, MatchMode::kWeak, MatchMode::kDetClsOnly}) {
    for (int t = 0; t < 30; ++t) {
      const auto inst = fixtures::RandomSmoothInstance(rng, mode, 1e-4);
      const auto report = CheckGradients(inst, CostWeights{}, LossWeights{}, mode);
      INFO("mode " << ToString(mode) << " worst index " << report.worst_index);
      CHECK(report.Passed(1e-4, 1e-8));
    }
  }
}

TEST_CASE("swapping duplicate transcriptions leaves loss and gradients identical") {
  std::mt19937_64 rng(55);
  const Alphabet a("as");
  for (int t = 0; t < 50; ++t) {
    std::vector<Prediction> preds;
    for (int n = 0; n < 4; ++n) preds.push_back(fixtures::RandomPrediction(rng, 6, a.size()));
    const auto word = a.Encode("as", 6);
    std::vector<GroundTruthInstance> gts{GroundTruthInstance::Text(word),
                                         GroundTruthInstance::Text(a.Encode("s", 6)),
                                         GroundTruthInstance::Text(word)};
    auto swapped = gts;
    std::swap(swapped[0], swapped[2]);
    const auto x = LossGradients(preds, gts, CostWeights{}, LossWeights{}, MatchMode::kWeak);
    const auto y = LossGradients(preds, swapped, CostWeights{}, LossWeights{}, MatchMode::kWeak);
    CHECK(x.loss.total == y.loss.total);
    CHECK(fixtures::FlattenGradients(x.grads) == fixtures::FlattenGradients(y.grads));
  }
}

TEST_CASE("without recognition weights full mode equals det+cls mode") {
  std::mt19937_64 rng(56);
  CostWeights cw;
  cw.alpha_rec = 0.0;
  LossWeights lw;
  lw.beta_rec = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = fixtures::RandomInstance(rng, MatchMode::kFull);
    const auto full = LossGradients(inst.preds, inst.gts, cw, lw, MatchMode::kFull);
    const auto det = LossGradients(inst.preds, inst.gts, cw, lw, MatchMode::kDetClsOnly);
    CHECK(full.loss.total == det.loss.total);
    CHECK(full.loss.matching.assignment == det.loss.matching.assignment);
    CHECK(fixtures::FlattenGradients(full.grads) == fixtures::FlattenGradients(det.grads));
  }
}

TEST_CASE("a small gradient step lowers the loss at a fixed matching") {
  std::mt19937_64 rng(57);
  for (int t = 0; t < 20; ++t) {
    auto inst = fixtures::RandomInstance(rng, MatchMode::kFull);
    const auto lg = LossGradients(inst.preds, inst.gts, CostWeights{}, LossWeights{},
                                  MatchMode::kFull);
    auto x = fixtures::Flatten(inst.preds);
    const auto g = fixtures::FlattenGradients(lg.grads);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= 1e-4 * g[k];
    const auto stepped = fixtures::Unflatten(inst.preds, x);
    const double after = LossAtMatching(stepped, inst.gts, lg.loss.matching,
                                        LossWeights{}, MatchMode::kFull, false)
                             .loss.total;
    CHECK(after < lg.loss.total);
  }
}

TEST_CASE("loss weight validation") {
  LossWeights lw;
  lw.noobj_coef = 0.0;
  CHECK_THROWS_AS(lw.Validate(), ValidationError);
  lw.noobj_coef = 1.5;
  CHECK_THROWS_AS(lw.Validate(), ValidationError);
  lw.noobj_coef = 1.0;
  CHECK_NOTHROW(lw.Validate());
  lw.beta_giou = -0.1;
  CHECK_THROWS_AS(lw.Validate(), ValidationError);
}

TEST_CASE("capacity error propagates") {
  std::mt19937_64 rng(58);
  const std::vector<Prediction> preds{fixtures::RandomPrediction(rng, 6, 6)};
  const std::vector<GroundTruthInstance> gts{fixtures::RandomGroundTruth(rng, 4, 5, true),
                                             fixtures::RandomGroundTruth(rng, 4, 5, true)};
  CHECK_THROWS_AS(HungarianLoss(preds, gts, CostWeights{}, LossWeights{}, MatchMode::kFull),
                  CapacityError);
}
