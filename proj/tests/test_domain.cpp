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

#include <filesystem>
#include <fstream>
#include <random>

#include "textspot/domain.hpp"
#include "textspot/error.hpp"

using namespace textspot;
namespace fs = std::filesystem;

namespace {

fs::path TempFile(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "textspot_domain_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path WriteLines(const std::string& name, const std::string& body) {
  const fs::path p = TempFile(name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("alphabet layout") {
  const Alphabet a = Alphabet::Default();
  CHECK(a.symbol_count() == 36);
  CHECK(a.size() == 38);
  CHECK(a.eos() == 36);
  CHECK(a.pad() == 37);
  CHECK(a.IndexOf('A') == a.IndexOf('a'));
  CHECK_FALSE(a.IndexOf('$').has_value());
  CHECK_THROWS_AS(Alphabet("abca"), ValidationError);
  CHECK_THROWS_AS(Alphabet(""), ValidationError);
  CHECK_THROWS_AS(a.Symbol(a.eos()), ArgumentError);
}

TEST_CASE("encode validates words") {
  const Alphabet ab("ab");
  CHECK(ab.Encode("ab", 16).symbols == std::vector<int>{0, 1});
  CHECK(ab.Encode("AB", 16).symbols == std::vector<int>{0, 1});
  CHECK_THROWS_AS(ab.Encode("", 16), ValidationError);
  CHECK_THROWS_AS(ab.Encode("abab", 4), ValidationError);
  CHECK_NOTHROW(ab.Encode("aba", 4));
  try {
    ab.Encode("a$", 16);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find('$') != std::string::npos);
  }
}

TEST_CASE("parse a full-supervision line") {
  const Scene s = ParseSceneLine(
      R"({"scene_id":"s0","gt":[{"cls":"text","box":[0.5,0.5,0.2,0.1],"text":"ab"}]})",
      1, Alphabet::Default());
  CHECK(s.scene_id == "s0");
  REQUIRE(s.ground_truth.size() == 1);
  CHECK(s.ground_truth[0].cls == ObjectClass::kText);
  CHECK(*s.ground_truth[0].box == Box::CenterSize(0.5, 0.5, 0.2, 0.1));
  CHECK(s.ground_truth[0].transcription->symbols == std::vector<int>{0, 1});
  CHECK(s.supervision == Supervision::kFull);
}

TEST_CASE("parse a weak line with repeated words") {
  const Scene s = ParseSceneLine(
      R"({"gt":[{"cls":"text","text":"as"},{"cls":"text","text":"as"}]})", 3,
      Alphabet::Default());
  CHECK(s.supervision == Supervision::kWeak);
  REQUIRE(s.ground_truth.size() == 2);
  for (const auto& g : s.ground_truth) {
    CHECK_FALSE(g.box.has_value());
    CHECK(g.transcription == s.ground_truth[0].transcription);
  }
}

TEST_CASE("parse errors and validation errors") {
  const Alphabet ab("ab");
  try {
    ParseSceneLine(R"({"gt":[{"cls":"text","text":"a$"}]})", 4, ab);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find('$') != std::string::npos);
  }
  CHECK_THROWS_AS(ParseSceneLine("{not json", 1, ab), ParseError);
  CHECK_THROWS_AS(ParseSceneLine(R"({"gt":5})", 1, ab), ParseError);
  CHECK_THROWS_AS(
      ParseSceneLine(R"({"gt":[{"cls":"text","text":"a","box":[0.5,0.5,0.1,0.1]},)"
                     R"({"cls":"text","text":"b"}]})",
                     1, ab),
      ValidationError);
  CHECK_THROWS_AS(ParseSceneLine(R"({"gt":[{"cls":"text","text":"a",)"
                                 R"("box":[0.5,0.5,0.1,0.1]}],"supervision":"weak"})",
                                 1, ab),
                  ValidationError);
  CHECK_THROWS_AS(ParseSceneLine(R"({"gt":[{"cls":"text"}]})", 1, ab),
                  ValidationError);
  CHECK_THROWS_AS(
      ParseSceneLine(R"({"gt":[{"cls":"text","text":"a","box":[0.5,0.5,1.5,0.1]}]})",
                     1, ab),
      ValidationError);
}

TEST_CASE("dataset parse reports the failing line") {
  const auto p = WriteLines(
      "bad.jsonl",
      "{\"gt\":[]}\n\n{\"gt\":[{\"text\":\"ab\"}]}\n{\"gt\":[{\"text\":\"ab\"\n");
  try {
    ParseDataset(p, Alphabet("ab"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(ParseDataset(TempFile("missing.jsonl"), Alphabet("ab")), IoError);
}

TEST_CASE("dataset round trip") {
  Scene s;
  s.scene_id = "x";
  s.features = Matrix(2, 3, {0.1, -2.5, 1e-7, 3.0, 0.0, 1.0 / 3});
  s.ground_truth.push_back(GroundTruthInstance::Text(
      Alphabet::Default().Encode("hello", 16), Box::CenterSize(0.3, 0.4, 0.2, 0.1)));
  s.ground_truth.push_back({ObjectClass::kNoObject, std::nullopt, std::nullopt});
  const auto p = TempFile("round.jsonl");
  WriteDataset(p, {s, s}, Alphabet::Default());
  const auto back = ParseDataset(p, Alphabet::Default());
  REQUIRE(back.size() == 2);
  CHECK(back[0].features == s.features);
  CHECK(back[0].ground_truth[0].box == s.ground_truth[0].box);
  CHECK(back[0].ground_truth[0].transcription == s.ground_truth[0].transcription);
  CHECK(back[0].ground_truth[1].cls == ObjectClass::kNoObject);
  CHECK(SceneToLine(back[1], Alphabet::Default()) ==
        SceneToLine(s, Alphabet::Default()));
}

TEST_CASE("greedy decoding stops at EOS") {
  const Alphabet ab("ab");
  Prediction p;
  p.char_logits = Matrix(4, ab.size(), 0.0);
  p.char_logits(0, 0) = 5.0;         // 'a'
  p.char_logits(1, ab.eos()) = 5.0;  // EOS
  p.char_logits(2, 1) = 5.0;         // ignored after EOS
  CHECK(Decode(p, ab).text == "a");
  CHECK(Decode(p, ab).score_text == doctest::Approx(0.5));
  p.char_logits(0, ab.pad()) = 9.0;
  CHECK(Decode(p, ab).text.empty());
}

TEST_CASE("text probability is stable") {
  Prediction p;
  p.class_logits = {800.0, -800.0};
  CHECK(TextProbability(p) == 1.0);
  p.class_logits = {-800.0, 800.0};
  CHECK(TextProbability(p) == 0.0);
  p.class_logits = {std::log(4.0), 0.0};
  CHECK(TextProbability(p) == doctest::Approx(0.8));
}

TEST_CASE("serialize predictions: empty list and round trip") {
  const Alphabet a = Alphabet::Default();
  const auto empty = SerializePredictions(TempFile("empty.jsonl"), {}, a);
  CHECK(fs::file_size(empty) == 0);
  CHECK(ParseDetections(empty).empty());

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0), logit(-5.0, 5.0);
  std::vector<ScenePredictions> preds(4);
  for (std::size_t s = 0; s < preds.size(); ++s) {
    preds[s].scene_id = "scene" + std::to_string(s);
    for (int k = 0; k < 25; ++k) {
      Prediction p;
      p.class_logits = {logit(rng), logit(rng)};
      p.box = Box::CenterSize(u(rng), u(rng), u(rng), u(rng));
      p.char_logits = Matrix(16, a.size());
      for (double& x : p.char_logits.data) x = logit(rng);
      preds[s].preds.push_back(std::move(p));
    }
  }
  const auto path = SerializePredictions(TempFile("preds.jsonl"), preds, a);
  const auto back = ParseDetections(path);
  REQUIRE(back.size() == preds.size());
  for (std::size_t s = 0; s < preds.size(); ++s) {
    REQUIRE(back[s].preds.size() == preds[s].preds.size());
    for (std::size_t k = 0; k < back[s].preds.size(); ++k) {
      const DecodedPrediction expect = Decode(preds[s].preds[k], a);
      CHECK(back[s].preds[k] == expect);
    }
  }

  WriteRawPredictions(TempFile("raw.jsonl"), preds);
  const auto raw = ParseRawPredictions(TempFile("raw.jsonl"), a.size(), 16);
  REQUIRE(raw.size() == preds.size());
  CHECK(raw[2].preds[7].char_logits == preds[2].preds[7].char_logits);
  CHECK(raw[2].preds[7].class_logits == preds[2].preds[7].class_logits);
  CHECK_THROWS_AS(ParseRawPredictions(TempFile("raw.jsonl"), a.size(), 8),
                  ValidationError);
}

TEST_CASE("unwritable prediction path") {
  CHECK_THROWS_AS(SerializePredictions("/nonexistent-dir/x/preds.jsonl", {},
                                       Alphabet::Default()),
                  IoError);
}
