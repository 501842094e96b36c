// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "boxforge/csv.hpp"
#include "boxforge/geometry.hpp"
#include "boxforge/scene.hpp"

namespace boxforge {

struct Detection {
  Box box;
  double score = 0;
  int category = 0;
  int scene = 0;
};

struct GroundTruth {
  Box box;
  int category = 0;
  int scene = 0;
};

/// COCO-style report: AP averaged over IoU 0.50:0.05:0.95 plus the fixed
/// 0.5 / 0.75 cuts. Size-bucket APs are present only when the bucket holds
/// at least one ground truth.
struct APReport {
  double ap = 0;
  double ap50 = 0;
  double ap75 = 0;
  std::optional<double> ap_small;
  std::optional<double> ap_medium;
  std::optional<double> ap_large;
};

inline double score_detections(double cls, double consistency) {
  if (cls < 0 || cls > 1 || consistency < 0 || consistency > 1) {
    throw ProbabilityOutOfRange("score_detections: inputs must be in [0, 1]");
  }
  return cls * consistency;
}

/// Greedy per-category NMS within each scene. A detection whose IoU with an
/// already kept one reaches the threshold is suppressed (>= comparison).
/// Ties are broken by (score desc, input index asc); output keeps that
/// order.
inline std::vector<Detection> nms(std::span<const Detection> dets,
                                  double n_t) {
  if (!(n_t > 0 && n_t < 1)) throw Error("nms: threshold must be in (0, 1)");
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return a < b;
  });
  std::vector<char> suppressed(dets.size(), 0);
  std::vector<Detection> kept;
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const int i = order[oi];
    if (suppressed[i]) continue;
    kept.push_back(dets[i]);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const int j = order[oj];
      if (suppressed[j]) continue;
      if (dets[j].scene != dets[i].scene ||
          dets[j].category != dets[i].category) {
        continue;
      }
      if (iou(dets[i].box, dets[j].box) >= n_t) suppressed[j] = 1;
    }
  }
  return kept;
}

namespace detail {

inline std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

struct AreaRange {
  double lo = 0;
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double a) const { return a >= lo && a < hi; }
};

/// Interpolated precision over the 101-point recall grid for one
/// (category, IoU threshold, area range) cell, accumulated across scenes.
/// Matching follows the COCO rule: detections in (score desc, index asc)
/// order each take the best-IoU unmatched ground truth at or above the
/// threshold, preferring non-ignored ones; ties keep the lowest gt index.
struct Cell {
  bool defined = false;            // category has >= 1 counted gt
  std::array<double, 101> interp{};
  double ap = 0;
};

inline Cell eval_cell(std::span<const Detection> dets,
                      std::span<const int> det_order,
                      std::span<const GroundTruth> gts,
                      std::span<const int> gt_ids, double thr,
                      const AreaRange& range) {
  Cell cell;
  // Ground truths outside the area range are ignored: they can absorb a
  // detection without it counting either way.
  std::vector<char> gt_ignore(gt_ids.size(), 0);
  int n_counted = 0;
  for (std::size_t k = 0; k < gt_ids.size(); ++k) {
    gt_ignore[k] = range.contains(area(gts[gt_ids[k]].box)) ? 0 : 1;
    if (!gt_ignore[k]) ++n_counted;
  }
  if (n_counted == 0) return cell;
  cell.defined = true;

  std::vector<char> gt_matched(gt_ids.size(), 0);
  std::vector<char> det_tp;
  std::vector<char> det_ignore;
  det_tp.reserve(det_order.size());
  det_ignore.reserve(det_order.size());

  for (const int di : det_order) {
    const Detection& det = dets[di];
    int best = -1;
    double best_iou = thr;
    bool best_is_ignored = false;
    // Two passes: counted ground truths first, then ignored ones, which a
    // detection may fall back to only when nothing counted matched.
    for (const int pass : {0, 1}) {
      if (pass == 1 && best >= 0) break;
      for (std::size_t k = 0; k < gt_ids.size(); ++k) {
        if (gt_ignore[k] != pass) continue;
        if (gt_matched[k]) continue;
        const GroundTruth& gt = gts[gt_ids[k]];
        if (gt.scene != det.scene) continue;
        const double v = iou(det.box, gt.box);
        if (v < best_iou || (v == best_iou && best >= 0)) continue;
        best_iou = v;
        best = static_cast<int>(k);
        best_is_ignored = pass == 1;
      }
    }
    if (best >= 0) {
      gt_matched[best] = 1;
      det_tp.push_back(best_is_ignored ? 0 : 1);
      det_ignore.push_back(best_is_ignored ? 1 : 0);
    } else {
      det_tp.push_back(0);
      // An unmatched detection outside the area range does not count as a
      // false positive for this bucket.
      det_ignore.push_back(range.contains(area(det.box)) ? 0 : 1);
    }
  }

  // Precision / recall in score order over non-ignored detections.
  std::vector<double> precision;
  std::vector<double> recall;
  int tp = 0, fp = 0;
  for (std::size_t i = 0; i < det_tp.size(); ++i) {
    if (det_ignore[i]) continue;
    if (det_tp[i]) ++tp; else ++fp;
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall.push_back(static_cast<double>(tp) / n_counted);
  }
  // Monotone envelope from the right.
  for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double sum = 0;
  for (int j = 0; j <= 100; ++j) {
    const double r = j / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    const double q =
        it == recall.end() ? 0.0 : precision[it - recall.begin()];
    cell.interp[j] = q;
    sum += q;
  }
  cell.ap = sum / 101.0;
  return cell;
}

struct GroupedInput {
  std::vector<int> categories;                   // ascending, with gts
  std::map<int, std::vector<int>> det_order;     // per category, sorted
  std::map<int, std::vector<int>> gt_ids;        // per category
};

inline GroupedInput group_by_category(std::span<const Detection> dets,
                                      std::span<const GroundTruth> gts) {
  GroupedInput g;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    g.gt_ids[gts[i].category].push_back(static_cast<int>(i));
  }
  for (const auto& [cat, ids] : g.gt_ids) g.categories.push_back(cat);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (g.gt_ids.count(dets[i].category)) {
      g.det_order[dets[i].category].push_back(static_cast<int>(i));
    }
  }
  for (auto& [cat, order] : g.det_order) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dets[a].score != dets[b].score) {
        return dets[a].score > dets[b].score;
      }
      return a < b;
    });
  }
  return g;
}

inline std::optional<double> mean_ap_over_categories(
    std::span<const Detection> dets, const GroupedInput& g,
    std::span<const GroundTruth> gts, double thr, const AreaRange& range) {
  double sum = 0;
  int count = 0;
  for (const int cat : g.categories) {
    static const std::vector<int> kEmpty;
    const auto dit = g.det_order.find(cat);
    const Cell cell =
        eval_cell(dets, dit == g.det_order.end() ? kEmpty : dit->second, gts,
                  g.gt_ids.at(cat), thr, range);
    if (!cell.defined) continue;
    sum += cell.ap;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace detail

/// Size-bucket cutoffs: the COCO 32^2 / 96^2 areas scaled by the scene
/// stride, so buckets track the grid resolution.
struct SizeBuckets {
  double small_cutoff;
  double large_cutoff;
  explicit SizeBuckets(double stride = 1.0)
      : small_cutoff(32 * stride * 32 * stride),
        large_cutoff(96 * stride * 96 * stride) {}
};

inline APReport evaluate_ap(
    std::span<const Detection> dets, std::span<const GroundTruth> gts,
    std::span<const double> iou_thresholds = {},
    const SizeBuckets& buckets = SizeBuckets{}) {
  std::vector<double> thrs(iou_thresholds.begin(), iou_thresholds.end());
  if (thrs.empty()) thrs = detail::coco_thresholds();

  const auto grouped = detail::group_by_category(dets, gts);
  const detail::AreaRange all{};
  APReport report;

  double ap_sum = 0;
  int ap_count = 0;
  for (const double t : thrs) {
    const auto m = detail::mean_ap_over_categories(dets, grouped, gts, t, all);
    if (m) {
      ap_sum += *m;
      ++ap_count;
    }
    if (t == 0.5) report.ap50 = m.value_or(0.0);
    if (t == 0.75) report.ap75 = m.value_or(0.0);
  }
  report.ap = ap_count > 0 ? ap_sum / ap_count : 0.0;

  const detail::AreaRange small{0, buckets.small_cutoff};
  const detail::AreaRange medium{buckets.small_cutoff, buckets.large_cutoff};
  const detail::AreaRange large{buckets.large_cutoff,
                                std::numeric_limits<double>::infinity()};
  for (const auto& [range, slot] :
       {std::pair{small, &report.ap_small}, {medium, &report.ap_medium},
        {large, &report.ap_large}}) {
    double sum = 0;
    int count = 0;
    for (const double t : thrs) {
      const auto m =
          detail::mean_ap_over_categories(dets, grouped, gts, t, range);
      if (m) {
        sum += *m;
        ++count;
      }
    }
    if (count > 0) *slot = sum / count;
  }
  return report;
}

/// 101-point interpolated precision-recall curve at one IoU threshold,
/// averaged over categories that have ground truth. Returns an empty curve
/// when there is nothing to recall. [area_lo, area_hi) optionally restricts
/// the evaluation to one size bucket.
inline std::vector<std::pair<double, double>> pr_curve(
    std::span<const Detection> dets, std::span<const GroundTruth> gts,
    double iou_threshold, double area_lo = 0,
    double area_hi = std::numeric_limits<double>::infinity()) {
  if (!(iou_threshold > 0 && iou_threshold < 1)) {
    throw Error("pr_curve: threshold must be in (0, 1)");
  }
  const auto grouped = detail::group_by_category(dets, gts);
  const detail::AreaRange r{area_lo, area_hi};
  std::array<double, 101> sum{};
  int count = 0;
  for (const int cat : grouped.categories) {
    static const std::vector<int> kEmpty;
    const auto dit = grouped.det_order.find(cat);
    const auto cell = detail::eval_cell(
        dets, dit == grouped.det_order.end() ? kEmpty : dit->second, gts,
        grouped.gt_ids.at(cat), iou_threshold, r);
    if (!cell.defined) continue;
    for (int j = 0; j <= 100; ++j) sum[j] += cell.interp[j];
    ++count;
  }
  std::vector<std::pair<double, double>> curve;
  if (count == 0) return curve;
  curve.reserve(101);
  for (int j = 0; j <= 100; ++j) {
    curve.emplace_back(j / 100.0, sum[j] / count);
  }
  return curve;
}

inline std::vector<GroundTruth> gather_ground_truths(
    std::span<const Scene> scenes) {
  std::vector<GroundTruth> gts;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (const auto& inst : scenes[s].instances) {
      gts.push_back({inst.box, inst.category, static_cast<int>(s)});
    }
  }
  return gts;
}

inline void write_detections_csv(std::ostream& out,
                                 std::span<const Detection> dets) {
  out << "scene,category,x1,y1,x2,y2,score\n";
  for (const auto& d : dets) {
    out << d.scene << ',' << d.category << ',' << fixed6(d.box.x1) << ','
        << fixed6(d.box.y1) << ',' << fixed6(d.box.x2) << ','
        << fixed6(d.box.y2) << ',' << fixed6(d.score) << '\n';
  }
}

inline std::vector<Detection> read_detections_csv(std::istream& in) {
  std::vector<Detection> dets;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("scene,", 0) == 0) continue;  // header
    }
    std::istringstream row(line);
    std::string field;
    std::array<std::string, 7> fields;
    int k = 0;
    while (std::getline(row, field, ',') && k < 7) fields[k++] = field;
    if (k != 7) throw Error("read_detections_csv: malformed row: " + line);
    try {
      Detection d;
      d.scene = std::stoi(fields[0]);
      d.category = std::stoi(fields[1]);
      d.box = Box{std::stod(fields[2]), std::stod(fields[3]),
                  std::stod(fields[4]), std::stod(fields[5])};
      d.score = std::stod(fields[6]);
      dets.push_back(d);
    } catch (const std::exception&) {
      throw Error("read_detections_csv: malformed row: " + line);
    }
  }
  return dets;
}

inline void write_ap_report_csv(std::ostream& out, const APReport& r,
                                const SizeBuckets& buckets = SizeBuckets{}) {
  out << "# size buckets by gt area: small < " << fixed6(buckets.small_cutoff)
      << " <= medium < " << fixed6(buckets.large_cutoff) << " <= large\n";
  out << "ap,ap50,ap75,ap_small,ap_medium,ap_large\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? fixed6(*v) : std::string();
  };
  out << fixed6(r.ap) << ',' << fixed6(r.ap50) << ',' << fixed6(r.ap75)
      << ',' << opt(r.ap_small) << ',' << opt(r.ap_medium) << ','
      << opt(r.ap_large) << '\n';
}

inline void write_pr_curve_csv(
    std::ostream& out, std::span<const std::pair<double, double>> curve) {
  out << "recall,precision\n";
  for (const auto& [r, p] : curve) {
    out << fixed6(r) << ',' << fixed6(p) << '\n';
  }
}

}  // namespace boxforge
