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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "textspot/error.hpp"
#include "textspot/toygym.hpp"

namespace textspot::gym {
namespace {

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Offset of the glyph block inside a feature vector (after occupancy). The
// position of a word is the grid cell its row belongs to.
constexpr std::size_t kGlyphOffset = 1;

struct Shift {
  Matrix rotation;
  std::vector<double> bias;
};

Shift MakeShift(const WorldConfig& world) {
  const std::size_t d = world.feature_dim;
  std::mt19937_64 rng(world.shift_seed);
  std::vector<std::size_t> dims(d);
  std::iota(dims.begin(), dims.end(), 0);
  std::shuffle(dims.begin(), dims.end(), rng);
  // Givens rotations on disjoint planes; an odd leftover axis keeps its sign.
  Matrix q(d, d);
  if (d % 2 == 1) q(dims[d - 1], dims[d - 1]) = 1.0;
  const double c = std::cos(world.shift_angle);
  const double s = std::sin(world.shift_angle);
  for (std::size_t k = 0; k + 1 < d; k += 2) {
    const std::size_t i = dims[k], j = dims[k + 1];
    q(i, i) = c;
    q(i, j) = -s;
    q(j, i) = s;
    q(j, j) = c;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> bias(d);
  for (double& b : bias) b = world.shift_bias * normal(rng);
  return {std::move(q), std::move(bias)};
}

}  // namespace

std::size_t WorldConfig::bits_per_char() const {
  std::size_t bits = 1;
  while ((std::size_t{1} << bits) < alphabet.size()) ++bits;
  return bits;
}

void WorldConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (grid_rows == 0 || grid_cols == 0) fail("world.grid must be non-empty");
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    fail("world.noise must be >= 0");
  }
  if (min_words > max_words) fail("world.min_words exceeds world.max_words");
  if (max_words > num_queries) {
    fail("world.max_words exceeds world.num_queries");
  }
  if (max_words > num_locations()) {
    fail("world.max_words exceeds the number of grid cells");
  }
  if (min_chars == 0 || min_chars > max_chars) {
    fail("world.min_chars must be in [1, world.max_chars]");
  }
  if (max_chars + 1 > max_word_len) {
    fail("world.max_chars plus EOS exceeds world.max_word_len");
  }
  Alphabet check(alphabet);
  (void)check;
  if (feature_dim < kGlyphOffset + max_chars * bits_per_char()) {
    fail("world.feature_dim too small to encode " +
         std::to_string(max_chars) + " characters");
  }
  if (!(char_width > 0.0) || char_width * static_cast<double>(max_chars) > 1.0) {
    fail("world.char_width must be positive and fit the frame");
  }
  if (!(box_height > 0.0) || box_height > 1.0) {
    fail("world.box_height must lie in (0, 1]");
  }
  if (!(shift_bias >= 0.0)) fail("world.shift_bias must be >= 0");
  if (!std::isfinite(shift_angle)) fail("world.shift_angle must be finite");
}

Matrix DomainRotation(const WorldConfig& world) {
  return MakeShift(world).rotation;
}

Scene GenerateScene(const WorldConfig& world, Domain domain,
                    Supervision supervision, std::uint64_t seed,
                    std::string scene_id) {
  const Alphabet alphabet = world.MakeAlphabet();
  std::mt19937_64 rng(seed);
  const std::size_t cells = world.num_locations();
  const std::size_t bits = world.bits_per_char();

  std::uniform_int_distribution<std::size_t> word_count(world.min_words,
                                                        world.max_words);
  const std::size_t n_words = word_count(rng);
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> used(order.begin(),
                                order.begin() + static_cast<long>(n_words));
  std::sort(used.begin(), used.end());

  Scene scene;
  scene.scene_id = std::move(scene_id);
  scene.supervision = supervision;
  scene.features = Matrix(cells, world.feature_dim);

  std::uniform_int_distribution<std::size_t> length(world.min_chars,
                                                    world.max_chars);
  std::uniform_int_distribution<int> symbol(
      0, static_cast<int>(alphabet.symbol_count()) - 1);
  for (std::size_t cell : used) {
    const std::size_t r = cell / world.grid_cols;
    const std::size_t c = cell % world.grid_cols;
    const double cx = (static_cast<double>(c) + 0.5) /
                      static_cast<double>(world.grid_cols);
    const double cy = (static_cast<double>(r) + 0.5) /
                      static_cast<double>(world.grid_rows);
    Transcription word;
    const std::size_t len = length(rng);
    for (std::size_t k = 0; k < len; ++k) word.symbols.push_back(symbol(rng));

    auto f = scene.features.row(cell);
    f[0] = 1.0;
    for (std::size_t k = 0; k < len; ++k) {
      for (std::size_t b = 0; b < bits; ++b) {
        const bool set = (word.symbols[k] >> b) & 1;
        f[kGlyphOffset + k * bits + b] = set ? 1.0 : -1.0;
      }
    }
    GroundTruthInstance gt;
    gt.cls = ObjectClass::kText;
    gt.transcription = std::move(word);
    if (supervision == Supervision::kFull) {
      gt.box = Box::CenterSize(
          cx, cy, world.char_width * static_cast<double>(len),
          world.box_height);
    }
    scene.ground_truth.push_back(std::move(gt));
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : scene.features.data) v += world.noise * normal(rng);

  if (domain == Domain::kB) {
    const Shift shift = MakeShift(world);
    const std::size_t d = world.feature_dim;
    Matrix shifted(cells, d);
    for (std::size_t i = 0; i < cells; ++i) {
      for (std::size_t r = 0; r < d; ++r) {
        double s = shift.bias[r];
        for (std::size_t k = 0; k < d; ++k) {
          s += shift.rotation(r, k) * scene.features(i, k);
        }
        shifted(i, r) = s;
      }
    }
    scene.features = std::move(shifted);
  }
  return scene;
}

std::vector<Scene> GenerateScenes(const WorldConfig& world, Domain domain,
                                  Supervision supervision, std::size_t count,
                                  std::uint64_t seed, std::string_view prefix) {
  world.Validate();
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    scenes.push_back(GenerateScene(world, domain, supervision,
                                   SplitMix(seed * 1000003ULL + i),
                                   std::string(prefix) + std::to_string(i)));
  }
  return scenes;
}

}  // namespace textspot::gym
