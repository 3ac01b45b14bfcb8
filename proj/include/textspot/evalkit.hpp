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

#ifndef TEXTSPOT_EVALKIT_HPP_
#define TEXTSPOT_EVALKIT_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textspot/domain.hpp"

namespace textspot {

enum class EvalTask {
  kWordSpotting,  // alphanumeric-normalized words, short words don't-care
  kEndToEnd,      // case-folded exact transcription
  kDetection,     // boxes only
};

std::string_view ToString(EvalTask task);
EvalTask ParseEvalTask(std::string_view name);

struct EvalProtocol {
  EvalTask task = EvalTask::kEndToEnd;
  double iou_threshold = 0.5;
  std::optional<std::vector<std::string>> lexicon;

  // Throws ValidationError; lexicon words are checked against `alphabet`
  // when one is given.
  void Validate(const Alphabet* alphabet = nullptr) const;
};

struct EvalMatch {
  std::string scene_id;
  std::size_t gt_index = 0;
  std::size_t pred_index = 0;
  double iou = 0.0;
};

struct SceneEval {
  std::string scene_id;
  std::size_t true_positives = 0;
  std::size_t num_preds = 0;  // excluding predictions on don't-care words
  std::size_t num_gts = 0;    // excluding don't-care words
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t true_positives = 0;
  std::size_t num_preds = 0;
  std::size_t num_gts = 0;
  std::vector<EvalMatch> matches;
  std::vector<SceneEval> scenes;
};

// Ground-truth words of a fully annotated scene in prediction form.
SceneDetections GroundTruthAsDetections(const Scene& scene,
                                        const Alphabet& alphabet);

// Greedy IoU-descending one-to-one matching per scene. Predictions for a
// scene missing from `gts` raise ValidationError; ground-truth scenes without
// predictions count as misses. Empty prediction (or ground-truth) sets give a
// vacuous precision (or recall) of 1.
EvalReport Evaluate(const std::vector<SceneDetections>& preds,
                    const std::vector<SceneDetections>& gts,
                    const EvalProtocol& protocol);

std::size_t EditDistance(std::string_view a, std::string_view b);

// Closest lexicon entry by edit distance on case-folded text, ties to the
// earlier entry. Returns `word` unchanged when the best distance exceeds
// ceil(|word| / 2).
std::string LexiconCorrect(std::string_view word,
                           std::span<const std::string> lexicon);

std::vector<std::string> LoadLexicon(const std::filesystem::path& path);

}  // namespace textspot

#endif  // TEXTSPOT_EVALKIT_HPP_
