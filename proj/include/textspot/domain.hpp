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

#ifndef TEXTSPOT_DOMAIN_HPP_
#define TEXTSPOT_DOMAIN_HPP_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "textspot/geometry.hpp"
#include "textspot/matrix.hpp"

namespace textspot {

inline constexpr std::size_t kDefaultMaxWordLen = 16;

// Word as alphabet symbol indices. The terminating EOS is implicit.
struct Transcription {
  std::vector<int> symbols;
  friend bool operator==(const Transcription&, const Transcription&) = default;
};

// Ordered character set plus two reserved indices: EOS = |symbols| and
// PAD = |symbols| + 1. Characters are case-folded on lookup.
class Alphabet {
 public:
  // Lowercase a-z followed by digits 0-9.
  static Alphabet Default();

  explicit Alphabet(std::string_view symbols);

  std::size_t symbol_count() const { return symbols_.size(); }
  // Number of character classes emitted per recognition step.
  std::size_t size() const { return symbols_.size() + 2; }
  int eos() const { return static_cast<int>(symbols_.size()); }
  int pad() const { return static_cast<int>(symbols_.size()) + 1; }
  const std::string& symbols() const { return symbols_; }

  std::optional<int> IndexOf(char c) const;
  char Symbol(int index) const;

  // Throws ValidationError naming the first out-of-alphabet character, or
  // when the word is empty or longer than max_len - 1 (room for EOS).
  Transcription Encode(std::string_view text, std::size_t max_len) const;
  std::string Decode(const Transcription& t) const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::string symbols_;
  std::array<int, 256> lookup_{};
};

enum class ObjectClass { kText = 0, kNoObject = 1 };

struct GroundTruthInstance {
  ObjectClass cls = ObjectClass::kText;
  std::optional<Box> box;  // center-size normalized; absent in weak scenes
  std::optional<Transcription> transcription;

  static GroundTruthInstance Text(Transcription t,
                                  std::optional<Box> box = std::nullopt) {
    return {ObjectClass::kText, box, std::move(t)};
  }
};

// Raw per-query network output.
struct Prediction {
  std::array<double, 2> class_logits{0.0, 0.0};  // (Text, NoObject)
  Box box;                                        // center-size normalized
  Matrix char_logits;                             // max_word_len x alphabet size
};

enum class Supervision { kFull, kWeak };

struct Scene {
  std::string scene_id;
  Matrix features;  // one row per candidate location
  std::vector<GroundTruthInstance> ground_truth;
  Supervision supervision = Supervision::kFull;
};

// Decoded prediction as written to prediction files.
struct DecodedPrediction {
  double score_text = 0.0;
  Box box;
  std::string text;
  friend bool operator==(const DecodedPrediction&,
                         const DecodedPrediction&) = default;
};

struct SceneDetections {
  std::string scene_id;
  std::vector<DecodedPrediction> preds;
  friend bool operator==(const SceneDetections&,
                         const SceneDetections&) = default;
};

struct ScenePredictions {
  std::string scene_id;
  std::vector<Prediction> preds;
};

// Checks the type invariants of a scene; throws ValidationError.
void ValidateScene(const Scene& scene, const Alphabet& alphabet,
                   std::size_t max_word_len);

// Scene datasets: one JSON object per line.
Scene ParseSceneLine(std::string_view line, std::size_t line_no,
                     const Alphabet& alphabet,
                     std::size_t max_word_len = kDefaultMaxWordLen);
std::vector<Scene> ParseDataset(const std::filesystem::path& path,
                                const Alphabet& alphabet,
                                std::size_t max_word_len = kDefaultMaxWordLen);
std::string SceneToLine(const Scene& scene, const Alphabet& alphabet);
void WriteDataset(const std::filesystem::path& path,
                  const std::vector<Scene>& scenes, const Alphabet& alphabet);

// Greedy decoding: argmax per step, truncated at the first EOS or PAD.
DecodedPrediction Decode(const Prediction& pred, const Alphabet& alphabet);
double TextProbability(const Prediction& pred);

// Decodes and writes predictions; returns `path`.
std::filesystem::path SerializePredictions(
    const std::filesystem::path& path,
    const std::vector<ScenePredictions>& predictions,
    const Alphabet& alphabet);
void WriteDetections(const std::filesystem::path& path,
                     const std::vector<SceneDetections>& detections);
std::vector<SceneDetections> ParseDetections(const std::filesystem::path& path);

// Undecoded predictions (logits), used to inspect matching and losses.
void WriteRawPredictions(const std::filesystem::path& path,
                         const std::vector<ScenePredictions>& predictions);
std::vector<ScenePredictions> ParseRawPredictions(
    const std::filesystem::path& path, std::size_t alphabet_size,
    std::size_t max_word_len = kDefaultMaxWordLen);

}  // namespace textspot

#endif  // TEXTSPOT_DOMAIN_HPP_
