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

#ifndef TEXTSPOT_GEOMETRY_HPP_
#define TEXTSPOT_GEOMETRY_HPP_

#include <array>

namespace textspot {

enum class BoxFormat {
  kCenterSize,  // (cx, cy, w, h), normalized to the image
  kCorner,      // (x1, y1, x2, y2), absolute units of the frame
};

struct Box {
  BoxFormat format = BoxFormat::kCenterSize;
  std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};

  static Box CenterSize(double cx, double cy, double w, double h) {
    return Box{BoxFormat::kCenterSize, {cx, cy, w, h}};
  }
  static Box Corners(double x1, double y1, double x2, double y2) {
    return Box{BoxFormat::kCorner, {x1, y1, x2, y2}};
  }

  double area() const;

  friend bool operator==(const Box&, const Box&) = default;
};

struct ImageSize {
  double width = 1.0;
  double height = 1.0;
};

// True when the box satisfies the invariants of its representation.
bool IsValid(const Box& box);

// Converts between representations. Center-size boxes are normalized by
// `image`; corner boxes are in the absolute units of `image`.
Box Convert(const Box& box, BoxFormat target, ImageSize image = {});

// Both functions require corner boxes. Zero-area unions yield 0.
double Iou(const Box& a, const Box& b);
double Giou(const Box& a, const Box& b);

struct GiouWithGrad {
  double giou = 0.0;
  // d giou / d (x1, y1, x2, y2) of the first box.
  std::array<double, 4> d_first{0.0, 0.0, 0.0, 0.0};
};

// GIoU plus its gradient with respect to the corners of `a`. At the kinks of
// the min/max terms the one-sided derivative with strict comparisons is used.
GiouWithGrad GiouAndGradient(const Box& a, const Box& b);

}  // namespace textspot

#endif  // TEXTSPOT_GEOMETRY_HPP_
