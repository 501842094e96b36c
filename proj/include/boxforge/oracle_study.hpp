// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "boxforge/dnr.hpp"
#include "boxforge/geometry.hpp"
#include "boxforge/rng.hpp"

namespace boxforge {

/// One randomized instance for the ranking-vs-exhaustive comparison: a
/// ground truth plus n side-perturbed predictions that all overlap it.
struct OracleInstance {
  Box gt;
  std::vector<Box> preds;
};

inline Box random_gt_box(Rng& rng, double canvas = 100.0) {
  const double w = rng.uniform(0.2 * canvas, 0.6 * canvas);
  const double h = rng.uniform(0.2 * canvas, 0.6 * canvas);
  const double x1 = rng.uniform(0.0, canvas - w);
  const double y1 = rng.uniform(0.0, canvas - h);
  return Box{x1, y1, x1 + w, y1 + h};
}

inline OracleInstance random_oracle_instance(Rng& rng, int n,
                                             const Box* gt_override = nullptr,
                                             double side_noise = 0.35) {
  OracleInstance inst;
  inst.gt = gt_override ? *gt_override : random_gt_box(rng);
  const double w = inst.gt.width();
  const double h = inst.gt.height();
  inst.preds.reserve(n);
  for (int i = 0; i < n; ++i) {
    Box b;
    for (int attempt = 0; attempt < 100; ++attempt) {
      b = Box{inst.gt.x1 + rng.uniform(-1.0, 1.0) * side_noise * w,
              inst.gt.y1 + rng.uniform(-1.0, 1.0) * side_noise * h,
              inst.gt.x2 + rng.uniform(-1.0, 1.0) * side_noise * w,
              inst.gt.y2 + rng.uniform(-1.0, 1.0) * side_noise * h};
      if (b.valid() && iou(b, inst.gt) > 0) break;
      b = inst.gt;  // give up on a badly crossed draw
    }
    inst.preds.push_back(b);
  }
  return inst;
}

struct OracleTrial {
  int n = 0;
  double best_original = 0;
  double rank0 = 0;
  double oracle = 0;
  double gap = 0;  // oracle - rank0
};

struct OracleStudy {
  std::vector<OracleTrial> trials;
  double mean_gap = 0;
  double max_gap = 0;
};

/// Runs `trials` random instances of size n, comparing the rank-0
/// recombined box against the exhaustive side sweep and the best original
/// prediction. Optional gt_pool draws targets from real scene boxes.
inline OracleStudy oracle_study(std::uint64_t seed, int n, int trials,
                                int limit = 8,
                                std::span<const Box> gt_pool = {}) {
  Rng rng(seed);
  OracleStudy study;
  study.trials.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    const Box* gt = gt_pool.empty() ? nullptr : &gt_pool[t % gt_pool.size()];
    const auto inst = random_oracle_instance(rng, n, gt);
    const auto pipe = run_dnr(inst.preds, inst.gt);
    OracleTrial trial;
    trial.n = n;
    trial.rank0 = pipe.rec.scores[0][0];
    for (const auto& row : pipe.dec.scores) {
      trial.best_original = std::max(trial.best_original, row[0]);
    }
    trial.oracle = brute_force_optimal(inst.preds, inst.gt, limit).best_iou;
    trial.gap = trial.oracle - trial.rank0;
    study.max_gap = std::max(study.max_gap, trial.gap);
    study.mean_gap += trial.gap;
    study.trials.push_back(trial);
  }
  if (!study.trials.empty()) {
    study.mean_gap /= static_cast<double>(study.trials.size());
  }
  return study;
}

}  // namespace boxforge
