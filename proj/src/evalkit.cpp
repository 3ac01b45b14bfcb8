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

#include "textspot/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <tuple>

#include "textspot/error.hpp"

namespace textspot {
namespace {

std::string Fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool IsAlnum(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

std::string Normalize(std::string_view s, EvalTask task) {
  std::string out = Fold(s);
  if (task == EvalTask::kWordSpotting) {
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](char c) { return !IsAlnum(c); }),
              out.end());
  }
  return out;
}

bool IsDontCare(std::string_view gt_text, EvalTask task) {
  if (task != EvalTask::kWordSpotting) return false;
  if (gt_text.size() < 3) return true;
  return !std::all_of(gt_text.begin(), gt_text.end(), IsAlnum);
}

Box Corners(const Box& b) { return Convert(b, BoxFormat::kCorner); }

struct Candidate {
  double iou;
  std::size_t gt;
  std::size_t pred;
};

SceneEval EvaluateScene(const SceneDetections& preds,
                        const SceneDetections& gts,
                        const EvalProtocol& protocol,
                        std::vector<EvalMatch>& matches) {
  const EvalTask task = protocol.task;
  const std::size_t n_gt = gts.preds.size();
  const std::size_t n_pred = preds.preds.size();

  std::vector<Box> gt_boxes, pred_boxes;
  std::vector<std::string> gt_text, pred_text;
  std::vector<char> dont_care(n_gt, 0);
  for (std::size_t g = 0; g < n_gt; ++g) {
    gt_boxes.push_back(Corners(gts.preds[g].box));
    gt_text.push_back(Normalize(gts.preds[g].text, task));
    dont_care[g] = IsDontCare(gts.preds[g].text, task);
  }
  for (const auto& p : preds.preds) {
    pred_boxes.push_back(Corners(p.box));
    std::string text = Normalize(p.text, task);
    if (protocol.lexicon && task != EvalTask::kDetection) {
      text = Normalize(LexiconCorrect(text, *protocol.lexicon), task);
    }
    pred_text.push_back(std::move(text));
  }

  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < n_gt; ++g) {
    if (dont_care[g]) continue;
    for (std::size_t p = 0; p < n_pred; ++p) {
      const double iou = Iou(gt_boxes[g], pred_boxes[p]);
      if (iou < protocol.iou_threshold) continue;
      if (task != EvalTask::kDetection && gt_text[g] != pred_text[p]) continue;
      candidates.push_back({iou, g, p});
    }
  }
  // Order by IoU, then by prediction content rather than input position so
  // that shuffling predictions cannot change which ground truth is matched.
  auto pred_key = [&](std::size_t p) {
    const auto& d = preds.preds[p];
    return std::tie(d.box.v, pred_text[p], d.score_text);
  };
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.iou != b.iou) return a.iou > b.iou;
              if (a.gt != b.gt) return a.gt < b.gt;
              return pred_key(a.pred) < pred_key(b.pred);
            });

  std::vector<char> gt_used(n_gt, 0), pred_used(n_pred, 0);
  SceneEval scene{gts.scene_id, 0, 0, 0};
  for (const auto& c : candidates) {
    if (gt_used[c.gt] || pred_used[c.pred]) continue;
    gt_used[c.gt] = 1;
    pred_used[c.pred] = 1;
    ++scene.true_positives;
    matches.push_back({gts.scene_id, c.gt, c.pred, c.iou});
  }

  for (std::size_t g = 0; g < n_gt; ++g) {
    if (!dont_care[g]) ++scene.num_gts;
  }
  for (std::size_t p = 0; p < n_pred; ++p) {
    bool ignored = false;
    if (!pred_used[p]) {
      for (std::size_t g = 0; g < n_gt && !ignored; ++g) {
        ignored = dont_care[g] &&
                  Iou(gt_boxes[g], pred_boxes[p]) >= protocol.iou_threshold;
      }
    }
    if (!ignored) ++scene.num_preds;
  }
  return scene;
}

}  // namespace

std::string_view ToString(EvalTask task) {
  switch (task) {
    case EvalTask::kWordSpotting:
      return "wordspotting";
    case EvalTask::kEndToEnd:
      return "e2e";
    case EvalTask::kDetection:
      return "detection";
  }
  return "?";
}

EvalTask ParseEvalTask(std::string_view name) {
  if (name == "wordspotting" || name == "spotting") {
    return EvalTask::kWordSpotting;
  }
  if (name == "e2e" || name == "endtoend") return EvalTask::kEndToEnd;
  if (name == "detection" || name == "det") return EvalTask::kDetection;
  throw ArgumentError("unknown evaluation task '" + std::string(name) +
                      "' (expected wordspotting, e2e or detection)");
}

void EvalProtocol::Validate(const Alphabet* alphabet) const {
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
    throw ValidationError("iou_threshold must lie in (0, 1]");
  }
  if (!lexicon) return;
  if (lexicon->empty()) throw ValidationError("lexicon is empty");
  if (!alphabet) return;
  for (const auto& word : *lexicon) {
    for (char c : word) {
      if (!alphabet->IndexOf(c)) {
        throw ValidationError("lexicon word '" + word +
                              "' has character outside the alphabet");
      }
    }
  }
}

SceneDetections GroundTruthAsDetections(const Scene& scene,
                                        const Alphabet& alphabet) {
  SceneDetections out{scene.scene_id, {}};
  for (const auto& gt : scene.ground_truth) {
    if (gt.cls != ObjectClass::kText) continue;
    if (!gt.box) {
      throw ValidationError("scene " + scene.scene_id +
                            " has no boxes; evaluation needs full annotation");
    }
    out.preds.push_back({1.0, *gt.box, alphabet.Decode(*gt.transcription)});
  }
  return out;
}

EvalReport Evaluate(const std::vector<SceneDetections>& preds,
                    const std::vector<SceneDetections>& gts,
                    const EvalProtocol& protocol) {
  protocol.Validate();
  std::map<std::string, const SceneDetections*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.scene_id, &p).second) {
      throw ValidationError("duplicate prediction scene '" + p.scene_id + "'");
    }
  }
  std::map<std::string, bool> gt_ids;
  for (const auto& g : gts) gt_ids[g.scene_id] = true;
  for (const auto& [id, _] : by_id) {
    if (!gt_ids.count(id)) {
      throw ValidationError("prediction scene '" + id +
                            "' is absent from the ground truth");
    }
  }

  EvalReport report;
  const SceneDetections empty;
  for (const auto& g : gts) {
    auto it = by_id.find(g.scene_id);
    const SceneDetections& p = it == by_id.end() ? empty : *it->second;
    SceneEval scene = EvaluateScene(p, g, protocol, report.matches);
    report.true_positives += scene.true_positives;
    report.num_preds += scene.num_preds;
    report.num_gts += scene.num_gts;
    report.scenes.push_back(std::move(scene));
  }
  const auto tp = static_cast<double>(report.true_positives);
  report.precision =
      report.num_preds > 0 ? tp / static_cast<double>(report.num_preds) : 1.0;
  report.recall =
      report.num_gts > 0 ? tp / static_cast<double>(report.num_gts) : 1.0;
  const double pr = report.precision + report.recall;
  report.f_measure = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

std::size_t EditDistance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string LexiconCorrect(std::string_view word,
                           std::span<const std::string> lexicon) {
  if (lexicon.empty()) throw ArgumentError("lexicon is empty");
  const std::string folded = Fold(word);
  std::size_t best = 0;
  std::size_t best_dist = EditDistance(folded, Fold(lexicon[0]));
  for (std::size_t k = 1; k < lexicon.size() && best_dist > 0; ++k) {
    const std::size_t d = EditDistance(folded, Fold(lexicon[k]));
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  const std::size_t limit = (word.size() + 1) / 2;
  if (best_dist > limit) return std::string(word);
  return lexicon[best];
}

std::vector<std::string> LoadLexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(first, last - first + 1));
  }
  if (words.empty()) throw ValidationError("lexicon " + path.string() +
                                           " is empty");
  return words;
}

}  // namespace textspot
