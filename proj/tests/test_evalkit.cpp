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
#include <filesystem>
#include <fstream>
#include <random>

#include "eval_fixtures.hpp"
#include "oracles.hpp"
#include "textspot/error.hpp"
#include "textspot/evalkit.hpp"

using namespace textspot;

namespace {

// Axis-aligned box of the same size as `g`, shifted right until IoU = target.
Box ShiftedToIou(const Box& g, double target) {
  // Same-size boxes: IoU = (w - dx) / (w + dx).
  const double dx = g.v[2] * (1 - target) / (1 + target);
  return Box::CenterSize(g.v[0] + dx, g.v[1], g.v[2], g.v[3]);
}

EvalReport One(const std::string& pred_text, double iou, EvalTask task,
               std::optional<std::vector<std::string>> lexicon = std::nullopt) {
  const Box g = Box::CenterSize(0.5, 0.5, 0.2, 0.1);
  const std::vector<SceneDetections> gts{{"s", {{1.0, g, "hello"}}}};
  const std::vector<SceneDetections> preds{{"s", {{0.9, ShiftedToIou(g, iou), pred_text}}}};
  EvalProtocol protocol;
  protocol.task = task;
  protocol.lexicon = std::move(lexicon);
  return Evaluate(preds, gts, protocol);
}

}  // namespace

TEST_CASE("single prediction examples") {
  const auto hit = One("hello", 0.6, EvalTask::kEndToEnd);
  CHECK(hit.precision == 1.0);
  CHECK(hit.recall == 1.0);
  CHECK(hit.f_measure == 1.0);
  CHECK(One("hello", 0.4, EvalTask::kEndToEnd).f_measure == 0.0);
  CHECK(One("HELLO", 0.6, EvalTask::kEndToEnd).f_measure == 1.0);
  CHECK(One("hell0", 0.6, EvalTask::kEndToEnd).f_measure == 0.0);
  CHECK(One("hell0", 0.6, EvalTask::kEndToEnd,
            std::vector<std::string>{"hello", "world"})
            .f_measure == 1.0);
  CHECK(One("he-llo!", 0.6, EvalTask::kWordSpotting).f_measure == 1.0);
  CHECK(One("he-llo!", 0.6, EvalTask::kEndToEnd).f_measure == 0.0);
  CHECK(One("zzz", 0.6, EvalTask::kDetection).f_measure == 1.0);
}

TEST_CASE("lexicon correction") {
  const std::vector<std::string> lex{"hello", "world"};
  CHECK(LexiconCorrect("hello", lex) == "hello");
  CHECK(LexiconCorrect("hell0", lex) == "hello");
  CHECK(LexiconCorrect("zzzzzz", std::vector<std::string>{"hello"}) == "zzzzzz");
  CHECK(LexiconCorrect("wxrld", std::vector<std::string>{"world", "worle"}) == "world");
  CHECK_THROWS_AS(LexiconCorrect("x", std::vector<std::string>{}), ArgumentError);
}

TEST_CASE("edit distance agrees with the oracle") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 2000; ++i) {
    const auto a = fixtures::RandomText(rng), b = fixtures::RandomText(rng);
    CHECK(EditDistance(a, b) == oracle::Levenshtein(a, b));
  }
  CHECK(EditDistance("hell0", "hello") == 1);
  CHECK(EditDistance("hell0", "world") == 4);
}

TEST_CASE("wordspotting ignores short and non-alphanumeric words") {
  const Box b = Box::CenterSize(0.3, 0.3, 0.1, 0.1);
  const Box c = Box::CenterSize(0.7, 0.7, 0.1, 0.1);
  const std::vector<SceneDetections> gts{{"s", {{1, b, "ab"}, {1, c, "word"}}}};
  const std::vector<SceneDetections> preds{{"s", {{1, b, "xy"}, {1, c, "word"}}}};
  EvalProtocol p;
  p.task = EvalTask::kWordSpotting;
  const auto r = Evaluate(preds, gts, p);
  CHECK(r.num_gts == 1);
  CHECK(r.num_preds == 1);
  CHECK(r.f_measure == 1.0);
}

TEST_CASE("ground truth against itself") {
  std::mt19937_64 rng(62);
  std::vector<SceneDetections> gts, preds;
  fixtures::RandomEvalSet(rng, 30, gts, preds);
  for (auto task : {EvalTask::kEndToEnd, EvalTask::kWordSpotting, EvalTask::kDetection}) {
    for (double t : {0.05, 0.5, 0.9, 1.0}) {
      EvalProtocol p;
      p.task = task;
      p.iou_threshold = t;
      const auto r = Evaluate(gts, gts, p);
      CHECK(r.precision == 1.0);
      CHECK(r.recall == 1.0);
      CHECK(r.f_measure == 1.0);
    }
  }
}

TEST_CASE("raising the threshold never raises recall") {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SceneDetections> gts, preds;
    fixtures::RandomEvalSet(rng, 10, gts, preds);
    double last = 2.0;
    for (int k = 1; k <= 20; ++k) {
      EvalProtocol p;
      p.iou_threshold = 0.05 * k;
      const double r = Evaluate(preds, gts, p).recall;
      CHECK(r <= last);
      last = r;
    }
  }
}

TEST_CASE("adding ground-truth words to the lexicon never lowers F") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SceneDetections> gts, preds;
    fixtures::RandomEvalSet(rng, 8, gts, preds);
    EvalProtocol p;
    p.lexicon = std::vector<std::string>{"zzzz"};
    const double before = Evaluate(preds, gts, p).f_measure;
    for (const auto& s : gts) {
      for (const auto& d : s.preds) p.lexicon->push_back(d.text);
    }
    CHECK(Evaluate(preds, gts, p).f_measure >= before);
  }
}

TEST_CASE("prediction order does not matter") {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SceneDetections> gts, preds;
    fixtures::RandomEvalSet(rng, 10, gts, preds);
    // Duplicate detections make the greedy order matter.
    for (auto& s : preds) {
      if (!s.preds.empty()) s.preds.push_back(s.preds.front());
    }
    EvalProtocol p;
    const auto base = Evaluate(preds, gts, p);
    for (auto& s : preds) std::shuffle(s.preds.begin(), s.preds.end(), rng);
    std::shuffle(preds.begin(), preds.end(), rng);
    const auto r = Evaluate(preds, gts, p);
    CHECK(r.precision == base.precision);
    CHECK(r.recall == base.recall);
    CHECK(r.true_positives == base.true_positives);
    REQUIRE(r.matches.size() == base.matches.size());
    for (std::size_t k = 0; k < r.matches.size(); ++k) {
      CHECK(r.matches[k].gt_index == base.matches[k].gt_index);
      CHECK(r.matches[k].iou == base.matches[k].iou);
    }
  }
}

TEST_CASE("f is the harmonic mean and empty sets are vacuous") {
  std::mt19937_64 rng(66);
  std::vector<SceneDetections> gts, preds;
  fixtures::RandomEvalSet(rng, 20, gts, preds);
  const auto r = Evaluate(preds, gts, EvalProtocol{});
  if (r.precision + r.recall > 0) {
    CHECK(r.f_measure == doctest::Approx(2 * r.precision * r.recall /
                                         (r.precision + r.recall)));
  }
  const std::vector<SceneDetections> none{{"s", {}}};
  const auto empty = Evaluate(none, none, EvalProtocol{});
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);
}

TEST_CASE("protocol errors") {
  const std::vector<SceneDetections> gts{{"a", {}}};
  const std::vector<SceneDetections> preds{{"b", {}}};
  CHECK_THROWS_AS(Evaluate(preds, gts, EvalProtocol{}), ValidationError);
  EvalProtocol bad;
  bad.iou_threshold = 0.0;
  CHECK_THROWS_AS(Evaluate(gts, gts, bad), ValidationError);
  bad.iou_threshold = 0.5;
  bad.lexicon = std::vector<std::string>{"h$llo"};
  const Alphabet a = Alphabet::Default();
  CHECK_THROWS_AS(bad.Validate(&a), ValidationError);
  CHECK_THROWS_AS(ParseEvalTask("ocr"), ArgumentError);
}

TEST_CASE("lexicon file") {
  const auto path = std::filesystem::temp_directory_path() / "textspot_lexicon.txt";
  std::ofstream(path) << "hello\n\n  world \n";
  CHECK(LoadLexicon(path) == std::vector<std::string>{"hello", "world"});
  std::ofstream(path) << "\n";
  CHECK_THROWS_AS(LoadLexicon(path), ValidationError);
  CHECK_THROWS_AS(LoadLexicon("/nonexistent/lexicon.txt"), IoError);
}
