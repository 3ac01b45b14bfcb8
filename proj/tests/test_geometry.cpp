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

#include <random>

#include "oracles.hpp"
#include "textspot/error.hpp"
#include "textspot/geometry.hpp"

using namespace textspot;

namespace {

Box C(double x1, double y1, double x2, double y2) {
  return Box::Corners(x1, y1, x2, y2);
}

Box RandomCorners(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-5.0, 5.0), ext(0.01, 4.0);
  const double x = pos(rng), y = pos(rng);
  return C(x, y, x + ext(rng), y + ext(rng));
}

}  // namespace

TEST_CASE("convert full-image and point boxes") {
  const Box full = Convert(Box::CenterSize(0.5, 0.5, 1.0, 1.0),
                           BoxFormat::kCorner, {100, 100});
  CHECK(full == C(0, 0, 100, 100));
  const Box point = Convert(Box::CenterSize(0.5, 0.5, 0.0, 0.0),
                            BoxFormat::kCorner, {100, 100});
  CHECK(point == C(50, 50, 50, 50));
  CHECK(point.area() == 0.0);
}

TEST_CASE("convert round trip") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> side(1.0, 2000.0);
  for (int i = 0; i < 1000; ++i) {
    const double w = u(rng), h = u(rng);
    const Box b = Box::CenterSize(w / 2 + u(rng) * (1 - w), h / 2 + u(rng) * (1 - h),
                                  w, h);
    const ImageSize img{side(rng), side(rng)};
    const Box back =
        Convert(Convert(b, BoxFormat::kCorner, img), BoxFormat::kCenterSize, img);
    for (int k = 0; k < 4; ++k) CHECK(back.v[k] == doctest::Approx(b.v[k]).epsilon(1e-12));
  }
}

TEST_CASE("convert rejects non-positive image size") {
  CHECK_THROWS_AS(Convert(Box::CenterSize(0.5, 0.5, 0.1, 0.1),
                          BoxFormat::kCorner, {0, 10}),
                  ArgumentError);
  CHECK_THROWS_AS(Convert(C(0, 0, 1, 1), BoxFormat::kCenterSize, {10, -1}),
                  ArgumentError);
}

TEST_CASE("iou examples") {
  CHECK(Iou(C(0, 0, 1, 1), C(0, 0, 1, 1)) == 1.0);
  CHECK(Iou(C(0, 0, 1, 1), C(2, 0, 3, 1)) == 0.0);
  CHECK(Iou(C(0, 0, 2, 2), C(1, 1, 3, 3)) == doctest::Approx(1.0 / 7).epsilon(1e-15));
  CHECK(Iou(C(1, 1, 1, 1), C(1, 1, 1, 1)) == 0.0);
}

TEST_CASE("giou examples") {
  CHECK(Giou(C(0, 0, 1, 1), C(0, 0, 1, 1)) == 1.0);
  CHECK(std::abs(Giou(C(0, 0, 1, 1), C(2, 0, 3, 1)) + 1.0 / 3) < 1e-12);
  CHECK(std::abs(Giou(C(0, 0, 2, 2), C(1, 1, 3, 3)) - (1.0 / 7 - 2.0 / 9)) < 1e-12);
  CHECK(Giou(C(2, 2, 2, 2), C(2, 2, 2, 2)) == 0.0);
}

TEST_CASE("iou and giou require corner boxes") {
  const Box cs = Box::CenterSize(0.5, 0.5, 0.2, 0.2);
  CHECK_THROWS_AS(Iou(cs, C(0, 0, 1, 1)), ArgumentError);
  CHECK_THROWS_AS(Giou(C(0, 0, 1, 1), cs), ArgumentError);
}

TEST_CASE("iou and giou agree with the oracle and obey bounds") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Box a = RandomCorners(rng), b = RandomCorners(rng);
    const double iou = Iou(a, b), giou = Giou(a, b);
    CHECK(iou == doctest::Approx(oracle::Iou(a.v, b.v)).epsilon(1e-12));
    CHECK(giou == doctest::Approx(oracle::Giou(a.v, b.v)).epsilon(1e-12));
    CHECK(giou <= iou + 1e-15);
    CHECK(giou > -1.0);
    CHECK(iou <= 1.0);
    CHECK(Iou(b, a) == iou);
    CHECK(Giou(b, a) == doctest::Approx(giou).epsilon(1e-14));
  }
}

TEST_CASE("translation and scale invariance") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> shift(-100, 100), scale(0.01, 50);
  for (int i = 0; i < 2000; ++i) {
    const Box a = RandomCorners(rng), b = RandomCorners(rng);
    const double dx = shift(rng), dy = shift(rng), s = scale(rng);
    const Box at = C(a.v[0] + dx, a.v[1] + dy, a.v[2] + dx, a.v[3] + dy);
    const Box bt = C(b.v[0] + dx, b.v[1] + dy, b.v[2] + dx, b.v[3] + dy);
    CHECK(Iou(at, bt) == doctest::Approx(Iou(a, b)).epsilon(1e-9));
    CHECK(Giou(at, bt) == doctest::Approx(Giou(a, b)).epsilon(1e-9));
    const Box as = C(a.v[0] * s, a.v[1] * s, a.v[2] * s, a.v[3] * s);
    const Box bs = C(b.v[0] * s, b.v[1] * s, b.v[2] * s, b.v[3] * s);
    CHECK(Iou(as, bs) == doctest::Approx(Iou(a, b)).epsilon(1e-9));
    CHECK(Giou(as, bs) == doctest::Approx(Giou(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("giou equals iou when the hull is the union") {
  CHECK(Giou(C(0, 0, 2, 1), C(1, 0, 3, 1)) ==
        doctest::Approx(Iou(C(0, 0, 2, 1), C(1, 0, 3, 1))));
  CHECK(Giou(C(0, 0, 4, 4), C(1, 1, 2, 2)) == doctest::Approx(1.0 / 16));
}

TEST_CASE("giou gradient matches central differences") {
  std::mt19937_64 rng(13);
  const double h = 1e-6;
  for (int i = 0; i < 500; ++i) {
    const Box a = RandomCorners(rng), b = RandomCorners(rng);
    const auto g = GiouAndGradient(a, b);
    CHECK(g.giou == doctest::Approx(Giou(a, b)).epsilon(1e-14));
    for (int k = 0; k < 4; ++k) {
      Box p = a, m = a;
      p.v[k] += h;
      m.v[k] -= h;
      const double num = (oracle::Giou(p.v, b.v) - oracle::Giou(m.v, b.v)) / (2 * h);
      CHECK(g.d_first[k] == doctest::Approx(num).epsilon(1e-5).scale(1e-6));
    }
  }
}

TEST_CASE("validity") {
  CHECK(IsValid(Box::CenterSize(0.5, 0.5, 0.2, 0.2)));
  CHECK_FALSE(IsValid(Box::CenterSize(0.5, 0.5, -0.2, 0.2)));
  CHECK_FALSE(IsValid(Box::CenterSize(1.5, 0.5, 0.2, 0.2)));
  CHECK(IsValid(C(0, 0, 1, 1)));
  CHECK_FALSE(IsValid(C(1, 0, 0, 1)));
}
