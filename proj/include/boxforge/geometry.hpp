// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "boxforge/errors.hpp"

namespace boxforge {

/// Axis-aligned box in absolute coordinates. (x1,y1) is the top-left
/// corner, (x2,y2) the bottom-right (y grows downward, image convention).
/// Zero-area boxes are legal; x1 <= x2 and y1 <= y2 must hold.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  bool valid() const { return x1 <= x2 && y1 <= y2; }
  bool contains(double px, double py) const {
    return px >= x1 && px <= x2 && py >= y1 && py <= y2;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Point {
  double x = 0, y = 0;
};

/// Offsets from a pixel to the four sides of its box (left, top, right,
/// bottom), all nonnegative.
struct Distances {
  double l = 0, t = 0, r = 0, b = 0;
};

/// Absolute per-side differences between a predicted box and its target.
struct Deviations {
  double dl = 0, dr = 0, db = 0, dt = 0;
};

/// Boundary slot order used by every n-by-4 structure in the library.
enum Side : int { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

inline double box_side(const Box& b, int side) {
  switch (side) {
    case kLeft: return b.x1;
    case kRight: return b.x2;
    case kBottom: return b.y2;
    default: return b.y1;  // kTop
  }
}

inline Box replace_side(Box b, int side, double value) {
  switch (side) {
    case kLeft: b.x1 = value; break;
    case kRight: b.x2 = value; break;
    case kBottom: b.y2 = value; break;
    default: b.y1 = value; break;
  }
  return b;
}

inline double area(const Box& b) { return (b.x2 - b.x1) * (b.y2 - b.y1); }

inline double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0 || h <= 0) return 0;
  return w * h;
}

/// Intersection over union. Two boxes with an empty union score 0 so that
/// degenerate predictions never earn reward.
inline double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  if (uni <= 0) return 0;
  return inter / uni;
}

/// Generalized IoU in [-1, 1]: IoU minus the fraction of the enclosing hull
/// not covered by the union.
inline double giou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  const Box hull{std::min(a.x1, b.x1), std::min(a.y1, b.y1),
                 std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
  const double hull_area = area(hull);
  if (hull_area <= 0) return 0;
  const double iou_term = uni > 0 ? inter / uni : 0.0;
  return iou_term - (hull_area - uni) / hull_area;
}

inline Box dist_to_box(const Point& p, const Distances& d) {
  return Box{p.x - d.l, p.y - d.t, p.x + d.r, p.y + d.b};
}

/// Inverse of dist_to_box. The point must lie inside the box (sides
/// inclusive); the round trip dist_to_box(p, box_to_dist(p, b)) == b.
inline Distances box_to_dist(const Point& p, const Box& b) {
  if (!b.contains(p.x, p.y)) {
    throw PointOutsideBox("box_to_dist: point outside box");
  }
  return Distances{p.x - b.x1, p.y - b.y1, b.x2 - p.x, b.y2 - p.y};
}

inline Deviations boundary_deviations(const Box& pred, const Box& gt) {
  return Deviations{std::abs(pred.x1 - gt.x1), std::abs(pred.x2 - gt.x2),
                    std::abs(pred.y2 - gt.y2), std::abs(pred.y1 - gt.y1)};
}

inline double deviation_of(const Deviations& d, int side) {
  switch (side) {
    case kLeft: return d.dl;
    case kRight: return d.dr;
    case kBottom: return d.db;
    default: return d.dt;
  }
}

}  // namespace boxforge
