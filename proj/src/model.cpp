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

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "textspot/error.hpp"
#include "textspot/toygym.hpp"

namespace textspot::gym {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct ParamSpec {
  const char* name;
  std::size_t rows;
  std::size_t cols;
  bool bias;
};

std::vector<ParamSpec> Layout(const ModelShape& s) {
  const std::size_t p = s.pos_dim();
  return {
      {"enc.queries", s.num_queries, s.key_dim, false},
      {"enc.key_w", s.feature_dim, s.key_dim, false},
      {"enc.key_pos", p, s.key_dim, false},
      {"enc.value_w", s.feature_dim, s.d_emb, false},
      {"enc.value_pos", p, s.d_emb, false},
      {"enc.query_bias", s.num_queries, s.d_emb, false},
      {"det.w1", s.d_emb, s.d_emb, false},
      {"det.b1", 1, s.d_emb, true},
      {"det.w2", s.d_emb, s.d_emb, false},
      {"det.b2", 1, s.d_emb, true},
      {"det.w3", s.d_emb, 4, false},
      {"det.b3", 1, 4, true},
      {"cls.w", s.d_emb, 2, false},
      {"cls.b", 1, 2, true},
      {"rec.w_init", s.d_emb, s.hidden, false},
      {"rec.b_init", 1, s.hidden, true},
      {"rec.w_in", s.d_emb, s.hidden, false},
      {"rec.w_hh", s.hidden, s.hidden, false},
      {"rec.b", 1, s.hidden, true},
      {"rec.w_out", s.hidden, s.alphabet_size, false},
      {"rec.b_out", 1, s.alphabet_size, true},
  };
}

// Rows: [cx, cy, one-hot row, one-hot col] per grid cell.
Matrix PositionEncoding(const ModelShape& s) {
  Matrix pos(s.num_locations, s.pos_dim());
  for (std::size_t cell = 0; cell < s.num_locations; ++cell) {
    const std::size_t r = cell / s.grid_cols;
    const std::size_t c = cell % s.grid_cols;
    pos(cell, 0) = (static_cast<double>(c) + 0.5) /
                   static_cast<double>(s.grid_cols);
    pos(cell, 1) = (static_cast<double>(r) + 0.5) /
                   static_cast<double>(s.grid_rows);
    pos(cell, 2 + r) = 1.0;
    pos(cell, 2 + s.grid_rows + c) = 1.0;
  }
  return pos;
}

}  // namespace

void ModelShape::Validate() const {
  if (feature_dim == 0 || num_queries == 0 || key_dim == 0 || d_emb == 0 ||
      hidden == 0 || max_word_len == 0 || alphabet_size < 3) {
    throw ValidationError("model dimensions must be positive");
  }
  if (num_locations != grid_rows * grid_cols) {
    throw ValidationError("model num_locations must equal the grid size");
  }
}

ModelShape ShapeFor(const WorldConfig& world, std::size_t d_emb,
                    std::size_t hidden, std::size_t key_dim) {
  ModelShape s;
  s.feature_dim = world.feature_dim;
  s.grid_rows = world.grid_rows;
  s.grid_cols = world.grid_cols;
  s.num_locations = world.num_locations();
  s.num_queries = world.num_queries;
  s.key_dim = key_dim;
  s.d_emb = d_emb;
  s.hidden = hidden;
  s.alphabet_size = world.alphabet.size() + 2;
  s.max_word_len = world.max_word_len;
  return s;
}

ToyModel::ToyModel(const ModelShape& shape) : shape_(shape) {
  shape_.Validate();
  for (const auto& spec : Layout(shape_)) {
    params_.push_back({spec.name, Matrix(spec.rows, spec.cols)});
  }
}

ToyModel ToyModel::Zeros(const ModelShape& shape) { return ToyModel(shape); }

ToyModel ToyModel::Init(const ModelShape& shape, std::uint64_t seed) {
  ToyModel model(shape);
  std::mt19937_64 rng(seed);
  const auto layout = Layout(model.shape_);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].bias) continue;
    const double limit = std::sqrt(
        6.0 / static_cast<double>(layout[k].rows + layout[k].cols));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (double& v : model.params_[k].value.data) v = uniform(rng);
  }
  return model;
}

const Matrix& ToyModel::param(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw ArgumentError("no model parameter named '" + std::string(name) + "'");
}

Matrix& ToyModel::param(std::string_view name) {
  return const_cast<Matrix&>(std::as_const(*this).param(name));
}

bool ToyModel::IsDetectionParam(std::string_view name) {
  return name.starts_with("det.");
}

ForwardGraph BuildForward(const ToyModel& model, const Matrix& features) {
  const ModelShape& s = model.shape();
  if (features.rows != s.num_locations || features.cols != s.feature_dim) {
    throw ArgumentError("features " + features.shape_string() +
                        " do not match the encoder input (" +
                        std::to_string(s.num_locations) + ", " +
                        std::to_string(s.feature_dim) + ")");
  }
  ForwardGraph g;
  auto& t = g.tape;
  for (const auto& p : model.params()) g.params.push_back(t.Leaf(p.value));
  // Parameter ids follow Layout() order.
  auto id = [&](std::size_t k) { return g.params[k]; };
  const auto queries = id(0), key_w = id(1), key_pos = id(2), value_w = id(3),
             value_pos = id(4), query_bias = id(5);
  const auto det_w1 = id(6), det_b1 = id(7), det_w2 = id(8), det_b2 = id(9),
             det_w3 = id(10), det_b3 = id(11);
  const auto cls_w = id(12), cls_b = id(13);
  const auto rec_w_init = id(14), rec_b_init = id(15), rec_w_in = id(16),
             rec_w_hh = id(17), rec_b = id(18), rec_w_out = id(19),
             rec_b_out = id(20);

  const auto feats = t.Leaf(features);
  const auto pos = t.Leaf(PositionEncoding(s));

  // Query-to-location attention.
  const auto keys = t.Add(t.MatMul(feats, key_w), t.MatMul(pos, key_pos));
  const auto scores =
      t.Scale(t.MatMul(queries, t.Transpose(keys)),
              1.0 / std::sqrt(static_cast<double>(s.key_dim)));
  const auto attention = t.SoftmaxRows(scores);
  const auto values =
      t.Add(t.MatMul(feats, value_w), t.MatMul(pos, value_pos));
  const auto q_emb =
      t.Tanh(t.Add(t.MatMul(attention, values), query_bias));

  const auto h1 = t.Tanh(t.Add(t.MatMul(q_emb, det_w1), det_b1));
  const auto h2 = t.Tanh(t.Add(t.MatMul(h1, det_w2), det_b2));
  g.boxes = t.Sigmoid(t.Add(t.MatMul(h2, det_w3), det_b3));

  g.class_logits = t.Add(t.MatMul(q_emb, cls_w), cls_b);

  auto hidden = t.Tanh(t.Add(t.MatMul(q_emb, rec_w_init), rec_b_init));
  const auto drive = t.Add(t.MatMul(q_emb, rec_w_in), rec_b);
  for (std::size_t step = 0; step < s.max_word_len; ++step) {
    hidden = t.Tanh(t.Add(t.MatMul(hidden, rec_w_hh), drive));
    g.char_logits.push_back(t.Add(t.MatMul(hidden, rec_w_out), rec_b_out));
  }
  return g;
}

std::vector<Prediction> Predictions(const ForwardGraph& graph,
                                    const ModelShape& shape) {
  const Matrix& cls = graph.tape.value(graph.class_logits);
  const Matrix& boxes = graph.tape.value(graph.boxes);
  std::vector<Prediction> preds(shape.num_queries);
  for (std::size_t n = 0; n < shape.num_queries; ++n) {
    Prediction& p = preds[n];
    p.class_logits = {cls(n, 0), cls(n, 1)};
    p.box = Box::CenterSize(boxes(n, 0), boxes(n, 1), boxes(n, 2), boxes(n, 3));
    p.char_logits = Matrix(shape.max_word_len, shape.alphabet_size);
    for (std::size_t step = 0; step < shape.max_word_len; ++step) {
      const Matrix& logits = graph.tape.value(graph.char_logits[step]);
      for (std::size_t c = 0; c < shape.alphabet_size; ++c) {
        p.char_logits(step, c) = logits(n, c);
      }
    }
  }
  return preds;
}

std::vector<Prediction> ModelForward(const ToyModel& model,
                                     const Scene& scene) {
  const ForwardGraph graph = BuildForward(model, scene.features);
  return Predictions(graph, model.shape());
}

SceneDetections Detect(const ToyModel& model, const Scene& scene,
                       const Alphabet& alphabet, double score_threshold) {
  if (alphabet.size() != model.shape().alphabet_size) {
    throw ArgumentError("alphabet size does not match the model");
  }
  SceneDetections out{scene.scene_id, {}};
  for (const auto& p : ModelForward(model, scene)) {
    DecodedPrediction d = Decode(p, alphabet);
    if (d.score_text >= score_threshold) out.preds.push_back(std::move(d));
  }
  return out;
}

void SaveCheckpoint(const std::filesystem::path& path, const ToyModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const ModelShape& s = model.shape();
  ojson header;
  header["feature_dim"] = s.feature_dim;
  header["num_locations"] = s.num_locations;
  header["grid_rows"] = s.grid_rows;
  header["grid_cols"] = s.grid_cols;
  header["num_queries"] = s.num_queries;
  header["key_dim"] = s.key_dim;
  header["d_emb"] = s.d_emb;
  header["hidden"] = s.hidden;
  header["alphabet_size"] = s.alphabet_size;
  header["max_word_len"] = s.max_word_len;
  out << ojson{{"model_shape", header}}.dump() << '\n';
  for (const auto& p : model.params()) {
    ojson line;
    line["name"] = p.name;
    line["shape"] = {p.value.rows, p.value.cols};
    line["values"] = p.value.data;
    out << line.dump() << '\n';
  }
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

ToyModel LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> json {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        return json::parse(line);
      } catch (const json::exception& e) {
        throw ParseError(line_no, e.what());
      }
    }
    return json();
  };
  try {
    const json header = next();
    if (!header.contains("model_shape")) {
      throw ParseError(line_no, "checkpoint must start with model_shape");
    }
    const json& h = header["model_shape"];
    ModelShape s;
    s.feature_dim = h.at("feature_dim").get<std::size_t>();
    s.num_locations = h.at("num_locations").get<std::size_t>();
    s.grid_rows = h.at("grid_rows").get<std::size_t>();
    s.grid_cols = h.at("grid_cols").get<std::size_t>();
    s.num_queries = h.at("num_queries").get<std::size_t>();
    s.key_dim = h.at("key_dim").get<std::size_t>();
    s.d_emb = h.at("d_emb").get<std::size_t>();
    s.hidden = h.at("hidden").get<std::size_t>();
    s.alphabet_size = h.at("alphabet_size").get<std::size_t>();
    s.max_word_len = h.at("max_word_len").get<std::size_t>();
    ToyModel model = ToyModel::Zeros(s);
    for (auto& p : model.params()) {
      const json entry = next();
      if (entry.is_null()) {
        throw ParseError(line_no, "checkpoint ends before " + p.name);
      }
      if (entry.at("name").get<std::string>() != p.name) {
        throw ParseError(line_no, "expected parameter " + p.name);
      }
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2 || shape[0] != p.value.rows ||
          shape[1] != p.value.cols) {
        throw ParseError(line_no, "shape mismatch for " + p.name);
      }
      auto values = entry.at("values").get<std::vector<double>>();
      p.value = Matrix(shape[0], shape[1], std::move(values));
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(line_no, e.what());
  }
}

}  // namespace textspot::gym
