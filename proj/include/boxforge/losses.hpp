// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

#include "boxforge/geometry.hpp"

namespace boxforge {

/// -log IoU regression loss for one box. The caller must guarantee positive
/// overlap; zero-overlap boxes take the linear fallback penalty instead.
inline double iou_loss(const Box& pred, const Box& gt) {
  const double v = iou(pred, gt);
  if (v <= 0) throw ZeroOverlap("iou_loss: boxes do not overlap");
  return -std::log(v);
}

/// Partial derivative of -log IoU(box, gt) with respect to one side
/// coordinate of `box` (x1 / x2 / y2 / y1 for left / right / bottom / top).
///
/// d(-log(I/U)) = -dI/I + dU/U. The intersection term is piecewise linear
/// in each side; at an exact tie with the ground-truth side the side sits at
/// the kink and we emit 0 (the subgradient there contains 0, and a box equal
/// to its target must produce a zero gradient).
inline double neg_log_iou_side_partial(const Box& box, const Box& gt, int side) {
  const double iw = std::min(box.x2, gt.x2) - std::max(box.x1, gt.x1);
  const double ih = std::min(box.y2, gt.y2) - std::max(box.y1, gt.y1);
  if (iw <= 0 || ih <= 0) {
    throw ZeroOverlap("neg_log_iou_side_partial: boxes do not overlap");
  }
  const double inter = iw * ih;
  const double uni = area(box) + area(gt) - inter;

  double d_inter = 0;  // dI/ds
  double d_area = 0;   // dA(box)/ds
  switch (side) {
    case kLeft:
      if (box.x1 == gt.x1) return 0;
      d_inter = box.x1 > gt.x1 ? -ih : 0.0;
      d_area = -box.height();
      break;
    case kRight:
      if (box.x2 == gt.x2) return 0;
      d_inter = box.x2 < gt.x2 ? ih : 0.0;
      d_area = box.height();
      break;
    case kBottom:
      if (box.y2 == gt.y2) return 0;
      d_inter = box.y2 < gt.y2 ? iw : 0.0;
      d_area = box.width();
      break;
    default:  // kTop
      if (box.y1 == gt.y1) return 0;
      d_inter = box.y1 > gt.y1 ? -iw : 0.0;
      d_area = -box.width();
      break;
  }
  const double d_union = d_area - d_inter;
  return -d_inter / inter + d_union / uni;
}

/// Analytic gradient of -log IoU(dist_to_box(p, d), gt) over (l, t, r, b).
inline std::array<double, 4> iou_loss_grad(const Point& p, const Distances& d,
                                           const Box& gt) {
  const Box box = dist_to_box(p, d);
  // Side coordinate vs distance parameter: x1 = p.x - l, y1 = p.y - t,
  // x2 = p.x + r, y2 = p.y + b.
  return {
      -neg_log_iou_side_partial(box, gt, kLeft),
      -neg_log_iou_side_partial(box, gt, kTop),
      neg_log_iou_side_partial(box, gt, kRight),
      neg_log_iou_side_partial(box, gt, kBottom),
  };
}

struct FocalResult {
  double loss = 0;
  double dloss_dp = 0;
};

/// Focal loss -alpha_t (1 - p_t)^gamma log(p_t) with p_t = p for y = 1 and
/// 1 - p for y = 0; alpha_t follows the same flip. gamma = 0, alpha_t = 1
/// reduces to plain cross-entropy.
inline FocalResult focal_loss(double p, int y, double alpha = 0.25,
                              double gamma = 2.0) {
  if (!(p > 0 && p < 1)) {
    throw ProbabilityOutOfRange("focal_loss: p must be in (0, 1)");
  }
  const double pt = y == 1 ? p : 1.0 - p;
  const double at = y == 1 ? alpha : 1.0 - alpha;
  const double one_m = 1.0 - pt;
  const double loss = -at * std::pow(one_m, gamma) * std::log(pt);
  const double term1 =
      gamma > 0 ? gamma * std::pow(one_m, gamma - 1.0) * std::log(pt) : 0.0;
  const double term2 = std::pow(one_m, gamma) / pt;
  const double d_dpt = at * (term1 - term2);
  return {loss, y == 1 ? d_dpt : -d_dpt};
}

struct ConsistencyResult {
  double loss = 0;
  double dloss_dr = 0;
};

/// Binary cross-entropy against a soft IoU target; minimized at r == target.
inline ConsistencyResult consistency_loss(double r, double target_iou) {
  if (!(r > 0 && r < 1)) {
    throw ProbabilityOutOfRange("consistency_loss: r must be in (0, 1)");
  }
  const double t = target_iou;
  const double loss = -(t * std::log(r) + (1.0 - t) * std::log(1.0 - r));
  const double grad = -t / r + (1.0 - t) / (1.0 - r);
  return {loss, grad};
}

}  // namespace boxforge
