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

#include "textspot/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "textspot/error.hpp"

namespace textspot {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

char Fold(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void CloseChecked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

bool IsBlank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c));
  });
}

// Iterates non-blank lines with 1-based line numbers.
template <typename Fn>
void ForEachLine(const std::filesystem::path& path, Fn&& fn) {
  auto in = OpenForRead(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    fn(line, line_no);
  }
}

json ParseJsonLine(std::string_view line, std::size_t line_no) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ParseError(line_no, e.what());
  }
}

std::array<double, 4> ReadBox(const json& j, std::size_t line_no) {
  if (!j.is_array() || j.size() != 4) {
    throw ParseError(line_no, "box must be an array of 4 numbers");
  }
  std::array<double, 4> v{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (!j[k].is_number()) throw ParseError(line_no, "box entry not a number");
    v[k] = j[k].get<double>();
  }
  return v;
}

Matrix ReadMatrix(const json& j, std::size_t line_no, const char* field) {
  if (!j.is_array()) {
    throw ParseError(line_no, std::string(field) + " must be an array");
  }
  if (j.empty()) return {};
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ParseError(line_no, std::string(field) + " must be rectangular");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        throw ParseError(line_no, std::string(field) + " entry not a number");
      }
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

ojson MatrixToJson(const Matrix& m) {
  ojson rows = ojson::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto span = m.row(r);
    rows.push_back(std::vector<double>(span.begin(), span.end()));
  }
  return rows;
}

ojson BoxToJson(const Box& box) {
  return ojson::array({box.v[0], box.v[1], box.v[2], box.v[3]});
}

std::string GetString(const json& j, const char* key, std::size_t line_no) {
  const auto& v = j.at(key);
  if (!v.is_string()) {
    throw ParseError(line_no, std::string(key) + " must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

Alphabet Alphabet::Default() {
  return Alphabet("abcdefghijklmnopqrstuvwxyz0123456789");
}

Alphabet::Alphabet(std::string_view symbols) {
  lookup_.fill(-1);
  for (char raw : symbols) {
    const char c = Fold(raw);
    auto& slot = lookup_[static_cast<unsigned char>(c)];
    if (slot >= 0) {
      throw ValidationError(std::string("duplicate alphabet symbol '") + c +
                            "'");
    }
    slot = static_cast<int>(symbols_.size());
    symbols_.push_back(c);
  }
  if (symbols_.empty()) throw ValidationError("alphabet is empty");
}

std::optional<int> Alphabet::IndexOf(char c) const {
  const int idx = lookup_[static_cast<unsigned char>(Fold(c))];
  if (idx < 0) return std::nullopt;
  return idx;
}

char Alphabet::Symbol(int index) const {
  if (index < 0 || index >= static_cast<int>(symbols_.size())) {
    throw ArgumentError("symbol index " + std::to_string(index) +
                        " is reserved or out of range");
  }
  return symbols_[static_cast<std::size_t>(index)];
}

Transcription Alphabet::Encode(std::string_view text,
                               std::size_t max_len) const {
  if (text.empty()) throw ValidationError("transcription is empty");
  if (text.size() + 1 > max_len) {
    throw ValidationError("transcription '" + std::string(text) +
                          "' does not fit max_word_len " +
                          std::to_string(max_len) + " with EOS");
  }
  Transcription t;
  t.symbols.reserve(text.size());
  for (char c : text) {
    auto idx = IndexOf(c);
    if (!idx) {
      throw ValidationError(std::string("character '") + c + "' in '" +
                            std::string(text) + "' is not in the alphabet");
    }
    t.symbols.push_back(*idx);
  }
  return t;
}

std::string Alphabet::Decode(const Transcription& t) const {
  std::string s;
  s.reserve(t.symbols.size());
  for (int idx : t.symbols) s.push_back(Symbol(idx));
  return s;
}

void ValidateScene(const Scene& scene, const Alphabet& alphabet,
                   std::size_t max_word_len) {
  for (double x : scene.features.data) {
    if (!std::isfinite(x)) {
      throw ValidationError("scene " + scene.scene_id +
                            ": non-finite feature value");
    }
  }
  for (const auto& gt : scene.ground_truth) {
    if (gt.cls == ObjectClass::kNoObject) {
      if (gt.box || gt.transcription) {
        throw ValidationError("scene " + scene.scene_id +
                              ": no-object instance carries box or text");
      }
      continue;
    }
    if (!gt.transcription) {
      throw ValidationError("scene " + scene.scene_id +
                            ": text instance without transcription");
    }
    const auto& syms = gt.transcription->symbols;
    if (syms.empty() || syms.size() + 1 > max_word_len) {
      throw ValidationError("scene " + scene.scene_id +
                            ": transcription length out of range");
    }
    for (int s : syms) {
      if (s < 0 || s >= static_cast<int>(alphabet.symbol_count())) {
        throw ValidationError("scene " + scene.scene_id +
                              ": invalid symbol index " + std::to_string(s));
      }
    }
    if (scene.supervision == Supervision::kWeak && gt.box) {
      throw ValidationError("scene " + scene.scene_id +
                            ": weak scene carries a box");
    }
    if (scene.supervision == Supervision::kFull) {
      if (!gt.box) {
        throw ValidationError("scene " + scene.scene_id +
                              ": full scene has a text instance without box");
      }
      if (gt.box->format != BoxFormat::kCenterSize || !IsValid(*gt.box)) {
        throw ValidationError("scene " + scene.scene_id +
                              ": box must be center-size within [0,1]");
      }
    }
  }
}

Scene ParseSceneLine(std::string_view line, std::size_t line_no,
                     const Alphabet& alphabet, std::size_t max_word_len) {
  const json j = ParseJsonLine(line, line_no);
  Scene scene;
  scene.scene_id = j.contains("scene_id") ? GetString(j, "scene_id", line_no)
                                          : "scene" + std::to_string(line_no);
  if (j.contains("features")) {
    scene.features = ReadMatrix(j["features"], line_no, "features");
  }
  if (!j.contains("gt") || !j["gt"].is_array()) {
    throw ParseError(line_no, "missing gt array");
  }
  std::size_t with_box = 0;
  std::size_t text_count = 0;
  for (const auto& item : j["gt"]) {
    if (!item.is_object()) throw ParseError(line_no, "gt entry not an object");
    GroundTruthInstance gt;
    std::string cls = item.contains("cls") ? GetString(item, "cls", line_no)
                                           : std::string("text");
    std::transform(cls.begin(), cls.end(), cls.begin(), Fold);
    if (cls == "text") {
      gt.cls = ObjectClass::kText;
    } else if (cls == "noobject") {
      gt.cls = ObjectClass::kNoObject;
    } else {
      throw ParseError(line_no, "unknown cls '" + cls + "'");
    }
    if (item.contains("box")) {
      gt.box = Box{BoxFormat::kCenterSize, ReadBox(item["box"], line_no)};
    }
    if (item.contains("text")) {
      try {
        gt.transcription =
            alphabet.Encode(GetString(item, "text", line_no), max_word_len);
      } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " +
                              e.what());
      }
    }
    if (gt.cls == ObjectClass::kText) {
      ++text_count;
      if (gt.box) ++with_box;
    }
    scene.ground_truth.push_back(std::move(gt));
  }
  if (j.contains("supervision")) {
    const std::string sup = GetString(j, "supervision", line_no);
    if (sup == "full") {
      scene.supervision = Supervision::kFull;
    } else if (sup == "weak") {
      scene.supervision = Supervision::kWeak;
    } else {
      throw ParseError(line_no, "supervision must be \"full\" or \"weak\"");
    }
  } else if (with_box != 0 && with_box != text_count) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": mixed supervision within one scene");
  } else {
    scene.supervision = (text_count > 0 && with_box == 0) ? Supervision::kWeak
                                                          : Supervision::kFull;
  }
  try {
    ValidateScene(scene, alphabet, max_word_len);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
  }
  return scene;
}

std::vector<Scene> ParseDataset(const std::filesystem::path& path,
                                const Alphabet& alphabet,
                                std::size_t max_word_len) {
  std::vector<Scene> scenes;
  ForEachLine(path, [&](const std::string& line, std::size_t line_no) {
    scenes.push_back(ParseSceneLine(line, line_no, alphabet, max_word_len));
  });
  return scenes;
}

std::string SceneToLine(const Scene& scene, const Alphabet& alphabet) {
  ojson j;
  j["scene_id"] = scene.scene_id;
  j["features"] = MatrixToJson(scene.features);
  ojson gts = ojson::array();
  for (const auto& gt : scene.ground_truth) {
    ojson item;
    item["cls"] = gt.cls == ObjectClass::kText ? "text" : "noobject";
    if (gt.box) item["box"] = BoxToJson(*gt.box);
    if (gt.transcription) item["text"] = alphabet.Decode(*gt.transcription);
    gts.push_back(std::move(item));
  }
  j["gt"] = std::move(gts);
  j["supervision"] = scene.supervision == Supervision::kFull ? "full" : "weak";
  return j.dump();
}

void WriteDataset(const std::filesystem::path& path,
                  const std::vector<Scene>& scenes, const Alphabet& alphabet) {
  auto out = OpenForWrite(path);
  for (const auto& scene : scenes) out << SceneToLine(scene, alphabet) << '\n';
  CloseChecked(out, path);
}

double TextProbability(const Prediction& pred) {
  const double a = pred.class_logits[0];
  const double b = pred.class_logits[1];
  // 1 / (1 + exp(b - a)) is stable for either sign of the margin.
  const double d = b - a;
  if (d > 0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

DecodedPrediction Decode(const Prediction& pred, const Alphabet& alphabet) {
  DecodedPrediction out;
  out.score_text = TextProbability(pred);
  out.box = pred.box;
  const auto& logits = pred.char_logits;
  for (std::size_t step = 0; step < logits.rows; ++step) {
    auto row = logits.row(step);
    const auto best = static_cast<int>(
        std::max_element(row.begin(), row.end()) - row.begin());
    if (best >= alphabet.eos()) break;
    out.text.push_back(alphabet.Symbol(best));
  }
  return out;
}

std::filesystem::path SerializePredictions(
    const std::filesystem::path& path,
    const std::vector<ScenePredictions>& predictions,
    const Alphabet& alphabet) {
  std::vector<SceneDetections> decoded;
  decoded.reserve(predictions.size());
  for (const auto& scene : predictions) {
    SceneDetections det{scene.scene_id, {}};
    for (const auto& p : scene.preds) det.preds.push_back(Decode(p, alphabet));
    decoded.push_back(std::move(det));
  }
  WriteDetections(path, decoded);
  return path;
}

void WriteDetections(const std::filesystem::path& path,
                     const std::vector<SceneDetections>& detections) {
  auto out = OpenForWrite(path);
  for (const auto& scene : detections) {
    ojson j;
    j["scene_id"] = scene.scene_id;
    ojson preds = ojson::array();
    for (const auto& p : scene.preds) {
      ojson item;
      item["score_text"] = p.score_text;
      item["box"] = BoxToJson(p.box);
      item["text"] = p.text;
      preds.push_back(std::move(item));
    }
    j["preds"] = std::move(preds);
    out << j.dump() << '\n';
  }
  CloseChecked(out, path);
}

std::vector<SceneDetections> ParseDetections(
    const std::filesystem::path& path) {
  std::vector<SceneDetections> result;
  ForEachLine(path, [&](const std::string& line, std::size_t line_no) {
    const json j = ParseJsonLine(line, line_no);
    SceneDetections scene;
    try {
      scene.scene_id = GetString(j, "scene_id", line_no);
      for (const auto& item : j.at("preds")) {
        DecodedPrediction p;
        p.score_text = item.at("score_text").get<double>();
        p.box = Box{BoxFormat::kCenterSize, ReadBox(item.at("box"), line_no)};
        p.text = GetString(item, "text", line_no);
        scene.preds.push_back(std::move(p));
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    result.push_back(std::move(scene));
  });
  return result;
}

void WriteRawPredictions(const std::filesystem::path& path,
                         const std::vector<ScenePredictions>& predictions) {
  auto out = OpenForWrite(path);
  for (const auto& scene : predictions) {
    ojson j;
    j["scene_id"] = scene.scene_id;
    ojson preds = ojson::array();
    for (const auto& p : scene.preds) {
      ojson item;
      item["class_logits"] = ojson::array({p.class_logits[0],
                                           p.class_logits[1]});
      item["box"] = BoxToJson(p.box);
      item["char_logits"] = MatrixToJson(p.char_logits);
      preds.push_back(std::move(item));
    }
    j["raw_preds"] = std::move(preds);
    out << j.dump() << '\n';
  }
  CloseChecked(out, path);
}

std::vector<ScenePredictions> ParseRawPredictions(
    const std::filesystem::path& path, std::size_t alphabet_size,
    std::size_t max_word_len) {
  std::vector<ScenePredictions> result;
  ForEachLine(path, [&](const std::string& line, std::size_t line_no) {
    const json j = ParseJsonLine(line, line_no);
    ScenePredictions scene;
    try {
      scene.scene_id = GetString(j, "scene_id", line_no);
      for (const auto& item : j.at("raw_preds")) {
        Prediction p;
        const auto& logits = item.at("class_logits");
        if (!logits.is_array() || logits.size() != 2) {
          throw ParseError(line_no, "class_logits must have 2 entries");
        }
        p.class_logits = {logits[0].get<double>(), logits[1].get<double>()};
        p.box = Box{BoxFormat::kCenterSize, ReadBox(item.at("box"), line_no)};
        if (!IsValid(p.box)) {
          throw ValidationError("line " + std::to_string(line_no) +
                                ": prediction box outside [0,1]");
        }
        p.char_logits = ReadMatrix(item.at("char_logits"), line_no,
                                   "char_logits");
        if (p.char_logits.rows != max_word_len ||
            p.char_logits.cols != alphabet_size) {
          throw ValidationError(
              "line " + std::to_string(line_no) + ": char_logits shape " +
              p.char_logits.shape_string() + " expected (" +
              std::to_string(max_word_len) + ", " +
              std::to_string(alphabet_size) + ")");
        }
        scene.preds.push_back(std::move(p));
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    result.push_back(std::move(scene));
  });
  return result;
}

}  // namespace textspot
