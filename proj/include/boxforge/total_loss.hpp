// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "boxforge/assignment.hpp"
#include "boxforge/dnr.hpp"
#include "boxforge/geometry.hpp"
#include "boxforge/losses.hpp"

namespace boxforge {

struct LossBreakdown {
  double cls = 0;
  double reg = 0;
  double con = 0;
  double total = 0;
  int n_pos = 0;
  int n_fallback = 0;  // zero-overlap boxes routed to the linear penalty
};

/// One instance's ground truth plus the partition of its candidate pixels.
/// Partition ids index into the field below.
struct InstanceTargets {
  Box gt;
  int category = 0;
  Partition partition;
};

/// Dense per-pixel predictor outputs, already decoded to probabilities and
/// distances. `cls` is n_pixels * n_categories, row-major.
struct FieldView {
  std::span<const Point> points;
  std::span<const Distances> dists;
  std::span<const double> cls;
  std::span<const double> consistency;
  int n_categories = 1;
};

struct FieldGrads {
  std::vector<std::array<double, 4>> dist;  // (l, t, r, b) per pixel
  std::vector<double> cls;
  std::vector<double> consistency;

  void reset(std::size_t n_pixels, int n_categories) {
    dist.assign(n_pixels, {0, 0, 0, 0});
    cls.assign(n_pixels * static_cast<std::size_t>(n_categories), 0.0);
    consistency.assign(n_pixels, 0.0);
  }
};

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;
};

namespace detail {
// Linear fallback for boxes with no overlap, where -log IoU has no finite
// gradient: the boundary deviation sum normalized by the target perimeter
// scale. Gradient is the per-side sign.
inline double zero_overlap_penalty(const Point& loc, const Distances& d,
                                   const Box& gt,
                                   std::array<double, 4>* grad_ltrb) {
  const Box box = dist_to_box(loc, d);
  const Deviations dev = boundary_deviations(box, gt);
  const double scale = 1.0 / (gt.width() + gt.height());
  if (grad_ltrb) {
    auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    // d|side - gt_side| / d(distance param), chained through dist_to_box.
    (*grad_ltrb)[0] = -sgn(box.x1 - gt.x1) * scale;  // l
    (*grad_ltrb)[1] = -sgn(box.y1 - gt.y1) * scale;  // t
    (*grad_ltrb)[2] = sgn(box.x2 - gt.x2) * scale;   // r
    (*grad_ltrb)[3] = sgn(box.y2 - gt.y2) * scale;   // b
  }
  return (dev.dl + dev.dr + dev.db + dev.dt) * scale;
}
}  // namespace detail

/// The combined training loss: focal classification over every non-ignored
/// pixel, IoU regression (through the D&R pipeline when `use_dnr`) over
/// positives, and the consistency cross-entropy over positives, all
/// normalized by the positive count. Pass `n_pos_override` when several
/// scenes share one normalizer. Reductions run in fixed pixel-id order so
/// results are reproducible.
inline LossBreakdown total_loss(const FieldView& field,
                                std::span<const InstanceTargets> instances,
                                bool use_dnr, FieldGrads* grads = nullptr,
                                int n_pos_override = 0,
                                const FocalParams& focal = {}) {
  const std::size_t n_pixels = field.points.size();
  const int g = field.n_categories;

  LossBreakdown out;
  for (const auto& inst : instances) {
    out.n_pos += static_cast<int>(inst.partition.positives.size());
  }
  const int n_pos = n_pos_override > 0 ? n_pos_override : out.n_pos;
  if (n_pos <= 0) throw NoPositives("total_loss: no positive pixels");
  const double inv_pos = 1.0 / static_cast<double>(n_pos);

  if (grads) grads->reset(n_pixels, g);

  // Positive category per pixel (-1 = background or negative candidate).
  std::vector<int> pos_category(n_pixels, -1);
  std::vector<char> ignored(n_pixels, 0);
  for (const auto& inst : instances) {
    for (int id : inst.partition.positives) pos_category[id] = inst.category;
    for (int id : inst.partition.ignored) ignored[id] = 1;
  }

  double cls_sum = 0;
  for (std::size_t i = 0; i < n_pixels; ++i) {
    if (ignored[i]) continue;
    for (int c = 0; c < g; ++c) {
      const int y = pos_category[i] == c ? 1 : 0;
      const auto f =
          focal_loss(field.cls[i * g + c], y, focal.alpha, focal.gamma);
      cls_sum += f.loss;
      if (grads) grads->cls[i * g + c] += f.dloss_dp * inv_pos;
    }
  }

  double reg_sum = 0;
  double con_sum = 0;
  for (const auto& inst : instances) {
    // Split positives into boxes the IoU loss can differentiate and
    // zero-overlap boxes that take the fallback.
    std::vector<PixelPrediction> dnr_in;
    std::vector<int> dnr_ids;
    for (int id : inst.partition.positives) {
      const Box box = dist_to_box(field.points[id], field.dists[id]);
      const double v = iou(box, inst.gt);
      if (v > 0) {
        dnr_in.push_back({field.points[id], field.dists[id]});
        dnr_ids.push_back(id);
      } else {
        std::array<double, 4> gfb{};
        reg_sum += detail::zero_overlap_penalty(
            field.points[id], field.dists[id], inst.gt,
            grads ? &gfb : nullptr);
        if (grads) {
          for (int s = 0; s < 4; ++s) grads->dist[id][s] += gfb[s] * inv_pos;
        }
        ++out.n_fallback;
      }
    }
    if (!dnr_in.empty()) {
      if (use_dnr) {
        const auto res = dnr_loss(dnr_in, inst.gt);
        reg_sum += res.loss;
        if (grads) {
          for (std::size_t k = 0; k < dnr_ids.size(); ++k) {
            for (int s = 0; s < 4; ++s) {
              grads->dist[dnr_ids[k]][s] += res.grad[k][s] * inv_pos;
            }
          }
        }
      } else {
        for (std::size_t k = 0; k < dnr_in.size(); ++k) {
          reg_sum += iou_loss(dist_to_box(dnr_in[k].loc, dnr_in[k].dist),
                              inst.gt);
          if (grads) {
            const auto gr = iou_loss_grad(dnr_in[k].loc, dnr_in[k].dist,
                                          inst.gt);
            for (int s = 0; s < 4; ++s) {
              grads->dist[dnr_ids[k]][s] += gr[s] * inv_pos;
            }
          }
        }
      }
    }

    for (int id : inst.partition.positives) {
      const Box box = dist_to_box(field.points[id], field.dists[id]);
      const double target = iou(box, inst.gt);
      const auto c = consistency_loss(field.consistency[id], target);
      con_sum += c.loss;
      if (grads) grads->consistency[id] += c.dloss_dr * inv_pos;
    }
  }

  out.cls = cls_sum * inv_pos;
  out.reg = reg_sum * inv_pos;
  out.con = con_sum * inv_pos;
  out.total = out.cls + out.reg + out.con;
  return out;
}

}  // namespace boxforge
