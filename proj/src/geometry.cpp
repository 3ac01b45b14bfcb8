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

#include "textspot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "textspot/error.hpp"

namespace textspot {
namespace {

void RequireCorners(const Box& box, const char* who) {
  if (box.format != BoxFormat::kCorner) {
    throw ArgumentError(std::string(who) + " expects corner boxes");
  }
}

}  // namespace

double Box::area() const {
  if (format == BoxFormat::kCenterSize) return v[2] * v[3];
  return (v[2] - v[0]) * (v[3] - v[1]);
}

bool IsValid(const Box& box) {
  for (double x : box.v) {
    if (!std::isfinite(x)) return false;
  }
  if (box.format == BoxFormat::kCenterSize) {
    return std::all_of(box.v.begin(), box.v.end(),
                       [](double x) { return x >= 0.0 && x <= 1.0; });
  }
  return box.v[0] <= box.v[2] && box.v[1] <= box.v[3];
}

Box Convert(const Box& box, BoxFormat target, ImageSize image) {
  if (!(image.width > 0.0) || !(image.height > 0.0)) {
    std::ostringstream msg;
    msg << "image size must be positive, got " << image.width << "x"
        << image.height;
    throw ArgumentError(msg.str());
  }
  if (box.format == target) return box;
  const auto& v = box.v;
  if (target == BoxFormat::kCorner) {
    const double half_w = v[2] / 2.0;
    const double half_h = v[3] / 2.0;
    return Box::Corners((v[0] - half_w) * image.width,
                        (v[1] - half_h) * image.height,
                        (v[0] + half_w) * image.width,
                        (v[1] + half_h) * image.height);
  }
  const double x1 = v[0] / image.width;
  const double y1 = v[1] / image.height;
  const double x2 = v[2] / image.width;
  const double y2 = v[3] / image.height;
  return Box::CenterSize((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1);
}

double Iou(const Box& a, const Box& b) {
  RequireCorners(a, "iou");
  RequireCorners(b, "iou");
  const double iw = std::min(a.v[2], b.v[2]) - std::max(a.v[0], b.v[0]);
  const double ih = std::min(a.v[3], b.v[3]) - std::max(a.v[1], b.v[1]);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return inter / uni;
}

double Giou(const Box& a, const Box& b) {
  return GiouAndGradient(a, b).giou;
}

GiouWithGrad GiouAndGradient(const Box& a, const Box& b) {
  RequireCorners(a, "giou");
  RequireCorners(b, "giou");
  const auto& p = a.v;
  const auto& g = b.v;

  const double pw = p[2] - p[0];
  const double ph = p[3] - p[1];
  const double area_a = pw * ph;
  const double area_b = (g[2] - g[0]) * (g[3] - g[1]);

  const double iw = std::min(p[2], g[2]) - std::max(p[0], g[0]);
  const double ih = std::min(p[3], g[3]) - std::max(p[1], g[1]);
  const bool overlap = iw > 0.0 && ih > 0.0;
  const double inter = overlap ? iw * ih : 0.0;
  const double uni = area_a + area_b - inter;

  const double hw = std::max(p[2], g[2]) - std::min(p[0], g[0]);
  const double hh = std::max(p[3], g[3]) - std::min(p[1], g[1]);
  const double hull = hw * hh;

  GiouWithGrad out;
  if (!(hull > 0.0)) return out;  // both degenerate and coincident
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  out.giou = iou - (hull - uni) / hull;
  if (!(uni > 0.0)) return out;

  // Partial derivatives with respect to (x1, y1, x2, y2) of `a`.
  const std::array<double, 4> d_area{-ph, -pw, ph, pw};
  std::array<double, 4> d_inter{0.0, 0.0, 0.0, 0.0};
  if (overlap) {
    d_inter[0] = p[0] > g[0] ? -ih : 0.0;
    d_inter[2] = p[2] < g[2] ? ih : 0.0;
    d_inter[1] = p[1] > g[1] ? -iw : 0.0;
    d_inter[3] = p[3] < g[3] ? iw : 0.0;
  }
  std::array<double, 4> d_hull{0.0, 0.0, 0.0, 0.0};
  d_hull[0] = p[0] < g[0] ? -hh : 0.0;
  d_hull[2] = p[2] > g[2] ? hh : 0.0;
  d_hull[1] = p[1] < g[1] ? -hw : 0.0;
  d_hull[3] = p[3] > g[3] ? hw : 0.0;

  // giou = I/U - 1 + U/H
  for (int k = 0; k < 4; ++k) {
    const double d_uni = d_area[k] - d_inter[k];
    out.d_first[k] = d_inter[k] / uni - inter * d_uni / (uni * uni) +
                     d_uni / hull - uni * d_hull[k] / (hull * hull);
  }
  return out;
}

}  // namespace textspot
