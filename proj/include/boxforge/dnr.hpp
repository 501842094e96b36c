// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "boxforge/geometry.hpp"
#include "boxforge/losses.hpp"

namespace boxforge {

/// A grid location together with its regressed side offsets.
struct PixelPrediction {
  Point loc;
  Distances dist;
};

struct BoundaryEntry {
  double value = 0;
  int source = 0;  // index of the prediction that owns this side
};

/// The four per-side pools produced by decomposition. All pools have the
/// same length n, in source order.
struct BoundaryPools {
  std::vector<BoundaryEntry> left, right, bottom, top;

  const std::vector<BoundaryEntry>& side(int s) const {
    switch (s) {
      case kLeft: return left;
      case kRight: return right;
      case kBottom: return bottom;
      default: return top;
    }
  }
  std::size_t size() const { return left.size(); }
};

/// n-by-4 confidence matrix, columns ordered (left, right, bottom, top).
using ScoreMatrix = std::vector<std::array<double, 4>>;

/// One permutation of 0..n-1 per side, sorted by ascending deviation from
/// the target side. Equal deviations fall back to ascending source index so
/// runs are reproducible.
struct RankedBoundaries {
  std::array<std::vector<int>, 4> order;  // order[side][rank] = source index
};

struct RecombinedSet {
  std::vector<Box> boxes;                        // rank order
  std::vector<std::array<int, 4>> provenance;    // source pixel per side slot
};

/// true where the recombined score strictly beats the aligned original one.
using BoundarySelection = std::vector<std::array<bool, 4>>;

struct Decomposition {
  BoundaryPools pools;
  ScoreMatrix scores;  // row i = IoU(preds[i], gt) repeated four times
};

inline Decomposition decompose(std::span<const Box> preds, const Box& gt) {
  if (preds.empty()) throw EmptyPredictionSet("decompose: no predictions");
  Decomposition out;
  const int n = static_cast<int>(preds.size());
  out.pools.left.reserve(n);
  out.pools.right.reserve(n);
  out.pools.bottom.reserve(n);
  out.pools.top.reserve(n);
  out.scores.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Box& b = preds[i];
    out.pools.left.push_back({b.x1, i});
    out.pools.right.push_back({b.x2, i});
    out.pools.bottom.push_back({b.y2, i});
    out.pools.top.push_back({b.y1, i});
    const double s = iou(b, gt);
    out.scores.push_back({s, s, s, s});
  }
  return out;
}

inline RankedBoundaries rank_boundaries(const BoundaryPools& pools,
                                        const Box& gt) {
  RankedBoundaries ranked;
  const int n = static_cast<int>(pools.size());
  for (int s = 0; s < 4; ++s) {
    const auto& pool = pools.side(s);
    const double target = box_side(gt, s);
    auto& perm = ranked.order[s];
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) {
      const double da = std::abs(pool[a].value - target);
      const double db = std::abs(pool[b].value - target);
      if (da != db) return da < db;
      return pool[a].source < pool[b].source;
    });
  }
  return ranked;
}

struct Recombination {
  RecombinedSet set;
  ScoreMatrix scores;  // row k = IoU(recombined box k, gt) repeated
};

/// Reassembles same-rank sides into new boxes. A crossed combination (left
/// beyond right, or top beyond bottom) is clamped to a zero-area box at the
/// crossing midpoint and scores 0, so assignment always falls back to the
/// original boundary there.
inline Recombination recombine(const RankedBoundaries& ranked,
                               const BoundaryPools& pools, const Box& gt) {
  Recombination out;
  const int n = static_cast<int>(pools.size());
  out.set.boxes.reserve(n);
  out.set.provenance.reserve(n);
  out.scores.reserve(n);
  for (int k = 0; k < n; ++k) {
    const int il = ranked.order[kLeft][k];
    const int ir = ranked.order[kRight][k];
    const int ib = ranked.order[kBottom][k];
    const int it = ranked.order[kTop][k];
    double l = pools.left[il].value;
    double r = pools.right[ir].value;
    double b = pools.bottom[ib].value;
    double t = pools.top[it].value;
    if (l > r) l = r = 0.5 * (l + r);
    if (t > b) t = b = 0.5 * (t + b);
    const Box box{l, t, r, b};
    out.set.boxes.push_back(box);
    out.set.provenance.push_back({il, ir, ib, it});
    const double s = iou(box, gt);
    out.scores.push_back({s, s, s, s});
  }
  return out;
}

struct ConfidenceAssignment {
  ScoreMatrix final;            // rank-indexed, like the recombined scores
  BoundarySelection from_recombined;
};

/// Elementwise max of the recombined score and the original score of the
/// source boundary. Rows of `original` are pixel-indexed and rows of
/// `recombined` are rank-indexed; the provenance columns align them.
inline ConfidenceAssignment assign_confidence(
    const ScoreMatrix& original, const ScoreMatrix& recombined,
    std::span<const std::array<int, 4>> provenance) {
  if (original.size() != recombined.size() ||
      recombined.size() != provenance.size()) {
    throw ShapeMismatch("assign_confidence: matrix sizes differ");
  }
  ConfidenceAssignment out;
  const int n = static_cast<int>(original.size());
  out.final.resize(n);
  out.from_recombined.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < 4; ++s) {
      const double orig = original[provenance[k][s]][s];
      const double rec = recombined[k][s];
      const bool wins = rec > orig;
      out.final[k][s] = wins ? rec : orig;
      out.from_recombined[k][s] = wins;
    }
  }
  return out;
}

struct DnrPipeline {
  Decomposition dec;
  RankedBoundaries ranked;
  Recombination rec;
  ConfidenceAssignment conf;
};

inline DnrPipeline run_dnr(std::span<const Box> preds, const Box& gt) {
  DnrPipeline p;
  p.dec = decompose(preds, gt);
  p.ranked = rank_boundaries(p.dec.pools, gt);
  p.rec = recombine(p.ranked, p.dec.pools, gt);
  p.conf = assign_confidence(p.dec.scores, p.rec.scores,
                             p.rec.set.provenance);
  return p;
}

struct DnrLossResult {
  double loss = 0;
  std::vector<std::array<double, 4>> grad;  // per input pixel, (l, t, r, b)
  DnrPipeline pipeline;
};

namespace detail {
// Pairwise sum keeps the n = 1 reduction bit-exact: four equal slot losses
// average back to the plain IoU loss.
inline double mean4(double a, double b, double c, double d) {
  return ((a + b) + (c + d)) * 0.25;
}

// Chain from a side coordinate to the owning pixel's distance parameter:
// x1 = p.x - l, y1 = p.y - t, x2 = p.x + r, y2 = p.y + b.
inline constexpr std::array<double, 4> kSideToDistSign = {-1.0, 1.0, 1.0, -1.0};
inline constexpr std::array<int, 4> kSideToDistIndex = {0, 2, 3, 1};
}  // namespace detail

/// The decomposition / ranking / recombination / assignment loss. Every
/// boundary slot contributes the -log IoU of whichever box won its
/// confidence (recombined or original); the slot's gradient is the partial
/// with respect to that one side, routed to the source pixel's matching
/// distance parameter. Slot losses are averaged per box; the caller divides
/// by its positive count.
inline DnrLossResult dnr_loss(std::span<const PixelPrediction> preds,
                              const Box& gt) {
  if (preds.empty()) throw EmptyPredictionSet("dnr_loss: no predictions");
  const int n = static_cast<int>(preds.size());
  std::vector<Box> boxes;
  boxes.reserve(n);
  for (const auto& p : preds) boxes.push_back(dist_to_box(p.loc, p.dist));
  for (const Box& b : boxes) {
    if (iou(b, gt) <= 0) {
      throw NonFiniteGradient("dnr_loss: prediction with zero overlap");
    }
  }

  DnrLossResult out;
  out.pipeline = run_dnr(boxes, gt);
  out.grad.assign(n, {0, 0, 0, 0});
  const auto& pipe = out.pipeline;

  for (int k = 0; k < n; ++k) {
    std::array<double, 4> slot_loss{};
    for (int s = 0; s < 4; ++s) {
      const int src = pipe.rec.set.provenance[k][s];
      const bool use_rec = pipe.conf.from_recombined[k][s];
      const Box& box = use_rec ? pipe.rec.set.boxes[k] : boxes[src];
      slot_loss[s] = -std::log(pipe.conf.final[k][s]);
      const double d_side = neg_log_iou_side_partial(box, gt, s);
      out.grad[src][detail::kSideToDistIndex[s]] +=
          detail::kSideToDistSign[s] * d_side;
    }
    out.loss += detail::mean4(slot_loss[0], slot_loss[1], slot_loss[2],
                              slot_loss[3]);
  }
  return out;
}

struct OracleResult {
  Box best;
  double best_iou = 0;
};

/// Exhaustive O(n^4) sweep over every side combination. Crossed
/// combinations score 0; ties keep the lexicographically first side-index
/// tuple. The default cap keeps the sweep at 8^4 = 4096 candidates.
inline OracleResult brute_force_optimal(std::span<const Box> preds,
                                        const Box& gt, int limit = 8) {
  if (preds.empty()) {
    throw EmptyPredictionSet("brute_force_optimal: no predictions");
  }
  const int n = static_cast<int>(preds.size());
  if (n > limit) {
    throw TooManyPredictions("brute_force_optimal: n exceeds limit");
  }
  // The (0,0,0,0) combination is preds[0] itself, so `best` always ends up
  // holding a valid box.
  OracleResult best{preds[0], iou(preds[0], gt)};
  for (int il = 0; il < n; ++il) {
    for (int ir = 0; ir < n; ++ir) {
      for (int ib = 0; ib < n; ++ib) {
        for (int it = 0; it < n; ++it) {
          const Box box{preds[il].x1, preds[it].y1, preds[ir].x2,
                        preds[ib].y2};
          const double s = box.valid() ? iou(box, gt) : 0.0;
          if (s > best.best_iou) {
            best.best_iou = s;
            best.best = box;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace boxforge
