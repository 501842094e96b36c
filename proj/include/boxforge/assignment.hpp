// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "boxforge/geometry.hpp"

namespace boxforge {

/// Pixels inside one instance's ground-truth box, with the two scores the
/// adaptive rule thresholds on: the per-pixel max classification score and
/// the IoU of the pixel's regressed box against the instance.
struct CandidateSet {
  std::vector<int> ids;          // pixel ids, ascending
  std::vector<Point> points;     // pixel locations, aligned with ids
  std::vector<double> cls_score; // in [0, 1]
  std::vector<double> reg_iou;   // in [0, 1]

  std::size_t size() const { return ids.size(); }
};

/// Positive / negative / ignored pixel ids. The three sets are pairwise
/// disjoint and their union is the candidate set; `ignored` is nonempty
/// only for the PNI strategy.
struct Partition {
  std::vector<int> positives;
  std::vector<int> negatives;
  std::vector<int> ignored;
};

enum class AssignStrategy { kNone, kPN, kPNI, kConstantRatio, kMean };

namespace detail {
inline void require_nonempty(const CandidateSet& c, const char* who) {
  if (c.ids.empty()) throw EmptyCandidates(std::string(who) + ": empty candidate set");
}

inline Box shrink_about_center(const Box& b, double sigma) {
  const double cx = 0.5 * (b.x1 + b.x2);
  const double cy = 0.5 * (b.y1 + b.y2);
  const double hw = 0.5 * b.width() * sigma;
  const double hh = 0.5 * b.height() * sigma;
  return Box{cx - hw, cy - hh, cx + hw, cy + hh};
}
}  // namespace detail

/// All candidates positive; the no-sampling baseline.
inline Partition none_assign(const CandidateSet& cands) {
  detail::require_nonempty(cands, "none_assign");
  Partition out;
  out.positives = cands.ids;
  return out;
}

/// The adaptive mean-threshold rule: a pixel is positive when its
/// classification score or its regression IoU reaches the candidate mean
/// (ties count as up), negative only when strictly below both means.
inline Partition semantic_consistency_assign(const CandidateSet& cands) {
  detail::require_nonempty(cands, "semantic_consistency_assign");
  const std::size_t n = cands.size();
  const double mean_c =
      std::accumulate(cands.cls_score.begin(), cands.cls_score.end(), 0.0) /
      static_cast<double>(n);
  const double mean_r =
      std::accumulate(cands.reg_iou.begin(), cands.reg_iou.end(), 0.0) /
      static_cast<double>(n);
  Partition out;
  for (std::size_t i = 0; i < n; ++i) {
    if (cands.cls_score[i] >= mean_c || cands.reg_iou[i] >= mean_r) {
      out.positives.push_back(cands.ids[i]);
    } else {
      out.negatives.push_back(cands.ids[i]);
    }
  }
  return out;
}

/// Fixed-ratio baseline: candidates ranked by descending regression IoU
/// (source index breaks ties), top floor(c * M) positive with a minimum of
/// one.
inline Partition constant_ratio_assign(const CandidateSet& cands, double c) {
  detail::require_nonempty(cands, "constant_ratio_assign");
  if (!(c > 0 && c <= 1)) {
    throw InvalidRatios("constant_ratio_assign: c must be in (0, 1]");
  }
  const int n = static_cast<int>(cands.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cands.reg_iou[a] != cands.reg_iou[b]) {
      return cands.reg_iou[a] > cands.reg_iou[b];
    }
    return cands.ids[a] < cands.ids[b];
  });
  int k = static_cast<int>(std::floor(c * n));
  k = std::clamp(k, 1, n);
  Partition out;
  for (int i = 0; i < n; ++i) {
    (i < k ? out.positives : out.negatives).push_back(cands.ids[order[i]]);
  }
  std::sort(out.positives.begin(), out.positives.end());
  std::sort(out.negatives.begin(), out.negatives.end());
  return out;
}

/// Center sampling: candidates inside the gt box shrunk about its center by
/// `sigma` are positive, the rest negative.
inline Partition center_sampling_assign(const CandidateSet& cands,
                                        const Box& gt, double sigma = 0.4) {
  detail::require_nonempty(cands, "center_sampling_assign");
  if (!(sigma > 0 && sigma <= 1)) {
    throw InvalidRatios("center_sampling_assign: sigma must be in (0, 1]");
  }
  const Box core = detail::shrink_about_center(gt, sigma);
  Partition out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Point& p = cands.points[i];
    (core.contains(p.x, p.y) ? out.positives : out.negatives)
        .push_back(cands.ids[i]);
  }
  return out;
}

/// Center sampling with an ignore ring between the positive core and the
/// negative remainder.
inline Partition pni_assign(const CandidateSet& cands, const Box& gt,
                            double sigma_pos = 0.2, double sigma_ign = 0.5) {
  detail::require_nonempty(cands, "pni_assign");
  if (!(sigma_pos > 0 && sigma_pos < sigma_ign && sigma_ign <= 1)) {
    throw InvalidRatios("pni_assign: need 0 < sigma_pos < sigma_ign <= 1");
  }
  const Box core = detail::shrink_about_center(gt, sigma_pos);
  const Box ring = detail::shrink_about_center(gt, sigma_ign);
  Partition out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Point& p = cands.points[i];
    if (core.contains(p.x, p.y)) {
      out.positives.push_back(cands.ids[i]);
    } else if (ring.contains(p.x, p.y)) {
      out.ignored.push_back(cands.ids[i]);
    } else {
      out.negatives.push_back(cands.ids[i]);
    }
  }
  return out;
}

/// Pixels covered by several instances represent the smallest one; ties go
/// to the lowest instance id. Returns -1 when no box contains the pixel.
inline int resolve_overlaps(std::span<const std::pair<int, Box>> instances,
                            const Point& pixel) {
  int best = -1;
  double best_area = std::numeric_limits<double>::infinity();
  for (const auto& [id, box] : instances) {
    if (!box.contains(pixel.x, pixel.y)) continue;
    const double a = area(box);
    if (a < best_area || (a == best_area && (best == -1 || id < best))) {
      best_area = a;
      best = id;
    }
  }
  return best;
}

/// Contiguous half-open (min, max] extent ranges covering (0, inf), one per
/// pyramid level.
struct LevelRanges {
  std::vector<std::pair<double, double>> ranges;

  static LevelRanges single_level() {
    return LevelRanges{{{0.0, std::numeric_limits<double>::infinity()}}};
  }

  void validate() const {
    if (ranges.empty()) throw SpecInvalid("LevelRanges: empty");
    if (ranges.front().first != 0) {
      throw SpecInvalid("LevelRanges: must start at 0");
    }
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (!(ranges[i].first < ranges[i].second)) {
        throw SpecInvalid("LevelRanges: empty range");
      }
      if (i + 1 < ranges.size() && ranges[i].second != ranges[i + 1].first) {
        throw SpecInvalid("LevelRanges: ranges must be contiguous");
      }
    }
    if (!std::isinf(ranges.back().second)) {
      throw SpecInvalid("LevelRanges: must cover (0, inf)");
    }
  }

  std::size_t size() const { return ranges.size(); }
};

/// FCOS-style level routing keyed on the box's max regression distance,
/// max(width, height) / 2. Ranges are half-open (min, max].
inline int fpn_level_assign(const Box& gt, const LevelRanges& levels) {
  const double key = 0.5 * std::max(gt.width(), gt.height());
  for (std::size_t i = 0; i < levels.ranges.size(); ++i) {
    if (key > levels.ranges[i].first && key <= levels.ranges[i].second) {
      return static_cast<int>(i);
    }
  }
  return 0;  // degenerate boxes (key == 0) route to the finest level
}

/// Dispatcher used by the training loop.
inline Partition assign(const CandidateSet& cands, const Box& gt,
                        AssignStrategy strategy, double ratio_c = 0.5,
                        double pn_sigma = 0.4, double pni_sigma_pos = 0.2,
                        double pni_sigma_ign = 0.5) {
  switch (strategy) {
    case AssignStrategy::kNone: return none_assign(cands);
    case AssignStrategy::kPN: return center_sampling_assign(cands, gt, pn_sigma);
    case AssignStrategy::kPNI:
      return pni_assign(cands, gt, pni_sigma_pos, pni_sigma_ign);
    case AssignStrategy::kConstantRatio:
      return constant_ratio_assign(cands, ratio_c);
    default: return semantic_consistency_assign(cands);
  }
}

}  // namespace boxforge
