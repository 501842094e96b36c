// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "boxforge/assignment.hpp"
#include "boxforge/csv.hpp"
#include "boxforge/dnr.hpp"
#include "boxforge/parallel.hpp"
#include "boxforge/postproc.hpp"
#include "boxforge/rng.hpp"
#include "boxforge/scene.hpp"
#include "boxforge/total_loss.hpp"

namespace boxforge {

namespace detail {
constexpr double kMinDist = 1e-3;        // exp decode needs positive targets
constexpr double kLogitClamp = 30.0;     // keeps sigmoid away from exact 0/1
constexpr double kDriftProbScale = 0.25; // fraction of pixels with drifted boxes
constexpr double kDriftShift = 0.6;      // drift offset relative to box size

inline double sigmoid_clamped(double z) {
  z = std::clamp(z, -kLogitClamp, kLogitClamp);
  return 1.0 / (1.0 + std::exp(-z));
}
}  // namespace detail

/// Free parameters for one pyramid level of one scene: per grid point four
/// raw log-distances, one logit per category, and one consistency logit.
struct LevelField {
  int w = 0, h = 0;
  double stride = 1.0;
  std::vector<double> reg;  // n * 4, (l, t, r, b)
  std::vector<double> cls;  // n * g logits
  std::vector<double> con;  // n logits

  int n() const { return w * h; }
  Point point(int i) const {
    return {static_cast<double>(i % w) * stride,
            static_cast<double>(i / w) * stride};
  }
};

/// The tabular per-pixel predictor for one scene: one LevelField per
/// configured pyramid level. There is no weight sharing; every grid point
/// owns its parameters.
struct Predictor {
  int n_categories = 1;
  std::vector<LevelField> levels;
};

struct DecodedLevel {
  std::vector<Point> points;
  std::vector<Distances> dists;
  std::vector<double> cls;  // probabilities
  std::vector<double> con;  // probabilities
};

inline DecodedLevel decode_level(const LevelField& f, int n_categories) {
  DecodedLevel d;
  const int n = f.n();
  d.points.resize(n);
  d.dists.resize(n);
  d.cls.resize(static_cast<std::size_t>(n) * n_categories);
  d.con.resize(n);
  for (int i = 0; i < n; ++i) {
    d.points[i] = f.point(i);
    d.dists[i] = Distances{std::exp(f.reg[i * 4 + 0]), std::exp(f.reg[i * 4 + 1]),
                           std::exp(f.reg[i * 4 + 2]), std::exp(f.reg[i * 4 + 3])};
    for (int c = 0; c < n_categories; ++c) {
      d.cls[i * n_categories + c] =
          detail::sigmoid_clamped(f.cls[i * n_categories + c]);
    }
    d.con[i] = detail::sigmoid_clamped(f.con[i]);
  }
  return d;
}

/// Builds a predictor whose decoded boxes equal each pixel's owning
/// instance box perturbed by multiplicative noise; a small fraction of
/// pixels additionally drift sideways so pixel quality varies inside an
/// instance. All logits start near zero. noise == 0 reproduces the ground
/// truth exactly (up to the exp/log round trip).
inline Predictor init_predictor(const Scene& scene, double noise,
                                std::uint64_t seed,
                                const LevelRanges& levels =
                                    LevelRanges::single_level()) {
  if (noise < 0) throw SpecInvalid("init_predictor: noise must be >= 0");
  levels.validate();
  Rng rng(seed);
  Predictor pred;
  pred.n_categories = scene.n_categories;
  const int g = scene.n_categories;

  // Instances routed to their pyramid level.
  std::vector<std::vector<std::pair<int, Box>>> per_level(levels.size());
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    const int lvl = fpn_level_assign(scene.instances[i].box, levels);
    per_level[lvl].push_back(
        {static_cast<int>(i), scene.instances[i].box});
  }

  const double drift_prob = detail::kDriftProbScale * std::min(1.0, noise);
  for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
    LevelField f;
    f.stride = scene.stride * static_cast<double>(1 << lvl);
    f.w = (scene.grid_w - 1) / (1 << lvl) + 1;
    f.h = (scene.grid_h - 1) / (1 << lvl) + 1;
    const int n = f.n();
    f.reg.assign(static_cast<std::size_t>(n) * 4, 0.0);
    f.cls.assign(static_cast<std::size_t>(n) * g, 0.0);
    f.con.assign(n, 0.0);

    for (int i = 0; i < n; ++i) {
      // Fixed number of draws per pixel so the stream stays aligned no
      // matter which branches run.
      const double u_drift = rng.uniform();
      double side_noise[4];
      for (double& v : side_noise) v = rng.uniform(-1.0, 1.0);
      const double ox = rng.uniform(-1.0, 1.0);
      const double oy = rng.uniform(-1.0, 1.0);
      std::vector<double> logit_noise(g + 1);
      for (double& v : logit_noise) v = rng.uniform(-1.0, 1.0);

      const Point p = f.point(i);
      const int owner = resolve_overlaps(per_level[lvl], p);
      if (owner >= 0) {
        Box target = scene.instances[owner].box;
        if (noise > 0 && u_drift < drift_prob) {
          const double dx = ox * detail::kDriftShift * target.width();
          const double dy = oy * detail::kDriftShift * target.height();
          target = Box{target.x1 + dx, target.y1 + dy, target.x2 + dx,
                       target.y2 + dy};
        }
        const double raw[4] = {p.x - target.x1, p.y - target.y1,
                               target.x2 - p.x, target.y2 - p.y};
        for (int s = 0; s < 4; ++s) {
          double d = std::max(raw[s], detail::kMinDist);
          d *= 1.0 + noise * side_noise[s];
          d = std::max(d, detail::kMinDist);
          f.reg[i * 4 + s] = std::log(d);
        }
      }
      for (int c = 0; c < g; ++c) {
        f.cls[i * g + c] = 0.01 * noise * logit_noise[c];
      }
      f.con[i] = 0.01 * noise * logit_noise[g];
    }
    pred.levels.push_back(std::move(f));
  }
  return pred;
}

struct VariantConfig {
  bool dnr = true;
  AssignStrategy assignment = AssignStrategy::kMean;
  double ratio_c = 0.5;
  double pn_sigma = 0.4;
  double pni_sigma_pos = 0.2;
  double pni_sigma_ign = 0.5;
  int epochs = 12;
  double lr = 150.0;
  std::vector<int> lr_drop_epochs = {8, 11};
  double lr_drop_factor = 0.1;
  std::uint64_t seed = 0;
  LevelRanges levels = LevelRanges::single_level();
  double init_noise = 0.5;
  SceneSpec scene_spec{};
  int n_scenes = 6;
  double score_threshold = 0.05;
  double nms_threshold = 0.5;
  FocalParams focal{};

  void validate() const {
    scene_spec.validate();
    levels.validate();
    if (epochs < 1) throw SpecInvalid("VariantConfig: epochs must be >= 1");
    if (lr < 0) throw SpecInvalid("VariantConfig: lr must be >= 0");
    if (init_noise < 0) throw SpecInvalid("VariantConfig: noise must be >= 0");
    if (n_scenes < 1) throw SpecInvalid("VariantConfig: need >= 1 scene");
    if (assignment == AssignStrategy::kConstantRatio &&
        !(ratio_c > 0 && ratio_c <= 1)) {
      throw SpecInvalid("VariantConfig: ratio_c must be in (0, 1]");
    }
  }
};

struct MetricsRow {
  int epoch = 0;
  double iou_mean = 0, iou_var = 0;
  double dr_iou_mean = 0, dr_iou_var = 0;
  double loss_cls = 0, loss_reg = 0, loss_con = 0;
  double pos_frac = 0;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;

  void write_csv(std::ostream& out) const {
    out << "epoch,iou_mean,iou_var,dr_iou_mean,dr_iou_var,"
           "loss_cls,loss_reg,loss_con,pos_frac\n";
    for (const auto& r : rows) {
      out << r.epoch << ',' << fixed6(r.iou_mean) << ',' << fixed6(r.iou_var)
          << ',' << fixed6(r.dr_iou_mean) << ',' << fixed6(r.dr_iou_var)
          << ',' << fixed6(r.loss_cls) << ',' << fixed6(r.loss_reg) << ','
          << fixed6(r.loss_con) << ',' << fixed6(r.pos_frac) << '\n';
    }
  }
};

/// Box-quality statistics for one epoch, taken before the parameter update.
/// The iou_* series tracks the raw predicted boxes of all positives; the
/// dr_* series tracks the per-boundary confidences after recombination and
/// assignment (averaged per box), whose mean can never fall below the
/// original one.
struct EpochStats {
  double iou_mean = 0, iou_var = 0;
  double dr_iou_mean = 0, dr_iou_var = 0;
  long n_pos = 0;
  long n_candidates = 0;
};

namespace detail {

struct ScenePrep {
  std::vector<DecodedLevel> decoded;
  std::vector<std::vector<InstanceTargets>> targets;  // per level
  long n_pos = 0;
  long n_cands = 0;
  // stats accumulators
  double sum_orig = 0, sumsq_orig = 0;
  double sum_dr = 0, sumsq_dr = 0;
  long n_boxes = 0;
};

inline ScenePrep prepare_scene(const Scene& scene, const Predictor& pred,
                               const VariantConfig& cfg) {
  ScenePrep prep;
  const int g = pred.n_categories;
  prep.decoded.reserve(pred.levels.size());
  for (const auto& f : pred.levels) prep.decoded.push_back(decode_level(f, g));
  prep.targets.resize(pred.levels.size());

  std::vector<std::vector<std::pair<int, Box>>> per_level(pred.levels.size());
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    const int lvl = fpn_level_assign(scene.instances[i].box, cfg.levels);
    per_level[lvl].push_back({static_cast<int>(i), scene.instances[i].box});
  }

  for (std::size_t lvl = 0; lvl < pred.levels.size(); ++lvl) {
    const auto& dec = prep.decoded[lvl];
    const int n = static_cast<int>(dec.points.size());
    std::vector<int> owner(n, -1);
    for (int i = 0; i < n; ++i) {
      owner[i] = resolve_overlaps(per_level[lvl], dec.points[i]);
    }
    for (const auto& [inst_id, gt] : per_level[lvl]) {
      CandidateSet cands;
      for (int i = 0; i < n; ++i) {
        if (owner[i] != inst_id) continue;
        cands.ids.push_back(i);
        cands.points.push_back(dec.points[i]);
        double best_cls = 0;
        for (int c = 0; c < g; ++c) {
          best_cls = std::max(best_cls, dec.cls[i * g + c]);
        }
        cands.cls_score.push_back(best_cls);
        cands.reg_iou.push_back(
            iou(dist_to_box(dec.points[i], dec.dists[i]), gt));
      }
      if (cands.ids.empty()) continue;  // fully shadowed by smaller instances
      prep.n_cands += static_cast<long>(cands.ids.size());

      InstanceTargets tgt;
      tgt.gt = gt;
      tgt.category = scene.instances[inst_id].category;
      tgt.partition = assign(cands, gt, cfg.assignment, cfg.ratio_c,
                             cfg.pn_sigma, cfg.pni_sigma_pos,
                             cfg.pni_sigma_ign);
      prep.n_pos += static_cast<long>(tgt.partition.positives.size());

      // Stats: original box IoUs of positives, and the assigned boundary
      // confidences of the same boxes after the D&R pipeline.
      std::vector<Box> valid_boxes;
      for (const int id : tgt.partition.positives) {
        const double v = iou(dist_to_box(dec.points[id], dec.dists[id]), gt);
        prep.sum_orig += v;
        prep.sumsq_orig += v * v;
        ++prep.n_boxes;
        // Zero-overlap boxes skip recombination and keep score 0, adding
        // nothing to the dr sums.
        if (v > 0) {
          valid_boxes.push_back(dist_to_box(dec.points[id], dec.dists[id]));
        }
      }
      if (!valid_boxes.empty()) {
        const auto pipe = run_dnr(valid_boxes, gt);
        for (std::size_t k = 0; k < valid_boxes.size(); ++k) {
          const auto& row = pipe.conf.final[k];
          const double m = ((row[0] + row[1]) + (row[2] + row[3])) * 0.25;
          prep.sum_dr += m;
          prep.sumsq_dr += m * m;
        }
      }
      prep.targets[lvl].push_back(std::move(tgt));
    }
  }
  return prep;
}

}  // namespace detail

struct StepOutcome {
  LossBreakdown loss;
  EpochStats stats;
};

/// One deterministic full-batch gradient step over all scenes. Losses and
/// gradients are normalized by the batch-wide positive count; scenes may be
/// prepared in parallel but are reduced in scene order.
inline StepOutcome train_step(std::span<const Scene> scenes,
                              std::vector<Predictor>& preds,
                              const VariantConfig& cfg, double lr = -1.0) {
  cfg.validate();
  if (scenes.size() != preds.size()) {
    throw ShapeMismatch("train_step: scene/predictor count mismatch");
  }
  if (lr < 0) lr = cfg.lr;

  std::vector<detail::ScenePrep> prep(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    prep[i] = detail::prepare_scene(scenes[i], preds[i], cfg);
  });

  long n_pos = 0, n_cands = 0, n_boxes = 0;
  double sum_orig = 0, sumsq_orig = 0, sum_dr = 0, sumsq_dr = 0;
  for (const auto& p : prep) {
    n_pos += p.n_pos;
    n_cands += p.n_cands;
    n_boxes += p.n_boxes;
    sum_orig += p.sum_orig;
    sumsq_orig += p.sumsq_orig;
    sum_dr += p.sum_dr;
    sumsq_dr += p.sumsq_dr;
  }
  if (n_pos == 0) throw NoPositives("train_step: no positive pixels in batch");

  StepOutcome out;
  out.stats.n_pos = n_pos;
  out.stats.n_candidates = n_cands;
  if (n_boxes > 0) {
    const double inv = 1.0 / static_cast<double>(n_boxes);
    out.stats.iou_mean = sum_orig * inv;
    out.stats.iou_var =
        std::max(0.0, sumsq_orig * inv - out.stats.iou_mean * out.stats.iou_mean);
    out.stats.dr_iou_mean = sum_dr * inv;
    out.stats.dr_iou_var =
        std::max(0.0, sumsq_dr * inv - out.stats.dr_iou_mean * out.stats.dr_iou_mean);
  }

  // Loss and gradients per (scene, level), all sharing the global N_pos.
  struct SceneLoss {
    LossBreakdown sum;
    std::vector<FieldGrads> grads;  // per level
  };
  std::vector<SceneLoss> losses(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    auto& sl = losses[i];
    sl.grads.resize(preds[i].levels.size());
    for (std::size_t lvl = 0; lvl < preds[i].levels.size(); ++lvl) {
      const auto& dec = prep[i].decoded[lvl];
      FieldView field{dec.points, dec.dists, dec.cls, dec.con,
                      preds[i].n_categories};
      const auto bd =
          total_loss(field, prep[i].targets[lvl], cfg.dnr, &sl.grads[lvl],
                     static_cast<int>(n_pos), cfg.focal);
      sl.sum.cls += bd.cls;
      sl.sum.reg += bd.reg;
      sl.sum.con += bd.con;
      sl.sum.n_fallback += bd.n_fallback;
    }
  });

  for (const auto& sl : losses) {
    out.loss.cls += sl.sum.cls;
    out.loss.reg += sl.sum.reg;
    out.loss.con += sl.sum.con;
    out.loss.n_fallback += sl.sum.n_fallback;
  }
  out.loss.n_pos = static_cast<int>(n_pos);
  out.loss.total = out.loss.cls + out.loss.reg + out.loss.con;

  // Parameter update, chained through the decoders: d(dist)/d(param) = dist
  // for the exp decode, d(p)/d(logit) = p (1 - p) for the sigmoids.
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const int g = preds[i].n_categories;
    for (std::size_t lvl = 0; lvl < preds[i].levels.size(); ++lvl) {
      auto& f = preds[i].levels[lvl];
      const auto& dec = prep[i].decoded[lvl];
      const auto& gr = losses[i].grads[lvl];
      const int n = f.n();
      for (int px = 0; px < n; ++px) {
        const double d[4] = {dec.dists[px].l, dec.dists[px].t,
                             dec.dists[px].r, dec.dists[px].b};
        for (int s = 0; s < 4; ++s) {
          f.reg[px * 4 + s] -= lr * gr.dist[px][s] * d[s];
        }
        for (int c = 0; c < g; ++c) {
          const double p = dec.cls[px * g + c];
          f.cls[px * g + c] -= lr * gr.cls[px * g + c] * p * (1.0 - p);
        }
        const double r = dec.con[px];
        f.con[px] -= lr * gr.consistency[px] * r * (1.0 - r);
      }
    }
  }
  return out;
}

struct TrainResult {
  std::vector<Scene> scenes;
  std::vector<Predictor> predictors;
  MetricsLog log;
};

inline std::vector<Scene> make_scenes(const VariantConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<Scene> scenes;
  scenes.reserve(cfg.n_scenes);
  for (int i = 0; i < cfg.n_scenes; ++i) {
    scenes.push_back(generate_scene(rng.next(), cfg.scene_spec));
  }
  return scenes;
}

inline TrainResult train_on(std::vector<Scene> scenes,
                            const VariantConfig& cfg) {
  cfg.validate();
  TrainResult res;
  res.scenes = std::move(scenes);
  Rng init_rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL);
  for (const auto& scene : res.scenes) {
    res.predictors.push_back(
        init_predictor(scene, cfg.init_noise, init_rng.next(), cfg.levels));
  }
  double lr = cfg.lr;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (std::find(cfg.lr_drop_epochs.begin(), cfg.lr_drop_epochs.end(),
                  epoch) != cfg.lr_drop_epochs.end()) {
      lr *= cfg.lr_drop_factor;
    }
    const auto step = train_step(res.scenes, res.predictors, cfg, lr);
    MetricsRow row;
    row.epoch = epoch;
    row.iou_mean = step.stats.iou_mean;
    row.iou_var = step.stats.iou_var;
    row.dr_iou_mean = step.stats.dr_iou_mean;
    row.dr_iou_var = step.stats.dr_iou_var;
    row.loss_cls = step.loss.cls;
    row.loss_reg = step.loss.reg;
    row.loss_con = step.loss.con;
    row.pos_frac = step.stats.n_candidates > 0
                       ? static_cast<double>(step.stats.n_pos) /
                             static_cast<double>(step.stats.n_candidates)
                       : 0.0;
    res.log.rows.push_back(row);
  }
  return res;
}

inline TrainResult train(const VariantConfig& cfg) {
  return train_on(make_scenes(cfg), cfg);
}

/// Dense decoding to detections: per grid point, the decoded box scored by
/// best-category probability times the consistency probability. Detections
/// at or below the threshold are dropped (strictly-greater rule).
inline std::vector<Detection> predict(const Predictor& pred,
                                      const Scene& scene, int scene_id,
                                      double score_threshold = 0.05) {
  std::vector<Detection> dets;
  const int g = pred.n_categories;
  for (const auto& f : pred.levels) {
    const DecodedLevel dec = decode_level(f, g);
    const int n = f.n();
    for (int i = 0; i < n; ++i) {
      int best_cat = 0;
      double best_p = dec.cls[i * g];
      for (int c = 1; c < g; ++c) {
        if (dec.cls[i * g + c] > best_p) {
          best_p = dec.cls[i * g + c];
          best_cat = c;
        }
      }
      const double score = score_detections(best_p, dec.con[i]);
      if (score > score_threshold) {
        dets.push_back({dist_to_box(dec.points[i], dec.dists[i]), score,
                        best_cat, scene_id});
      }
    }
  }
  (void)scene;
  return dets;
}

struct VariantSpec {
  std::string name;
  bool dnr = false;
  AssignStrategy assignment = AssignStrategy::kNone;
  double ratio_c = 0.5;
};

/// Named ablation variants: baseline, dnr, consistency / mean, both, none,
/// pn, pni, and c=<ratio>.
inline VariantSpec parse_variant(const std::string& token) {
  if (token == "baseline" || token == "none") {
    return {token, false, AssignStrategy::kNone, 0.5};
  }
  if (token == "dnr") return {token, true, AssignStrategy::kNone, 0.5};
  if (token == "consistency" || token == "mean") {
    return {token, false, AssignStrategy::kMean, 0.5};
  }
  if (token == "both") return {token, true, AssignStrategy::kMean, 0.5};
  if (token == "pn") return {token, false, AssignStrategy::kPN, 0.5};
  if (token == "pni") return {token, false, AssignStrategy::kPNI, 0.5};
  if (token.rfind("c=", 0) == 0) {
    const double c = std::stod(token.substr(2));
    if (!(c > 0 && c <= 1)) {
      throw SpecInvalid("parse_variant: ratio out of (0, 1]: " + token);
    }
    return {token, false, AssignStrategy::kConstantRatio, c};
  }
  throw SpecInvalid("parse_variant: unknown variant: " + token);
}

struct VariantOutcome {
  VariantSpec spec;
  APReport mean;
  double final_iou_mean = 0;
  double final_iou_var = 0;
  std::vector<APReport> per_seed;
  std::vector<double> seed_final_iou_mean;
  std::vector<double> seed_final_iou_var;
};

struct AblationTable {
  int n_seeds = 0;
  std::vector<VariantOutcome> rows;
};

/// Trains every variant on identical seeds and data and evaluates AP on the
/// training scenes (the tabular predictor has no transfer to unseen
/// scenes). Deterministic: rerunning yields identical tables.
inline AblationTable run_variant_grid(const VariantConfig& base,
                                      std::span<const VariantSpec> variants,
                                      int n_seeds) {
  if (variants.size() < 2) {
    throw SpecInvalid("run_variant_grid: need at least two variants");
  }
  if (n_seeds < 1) throw SpecInvalid("run_variant_grid: need >= 1 seed");
  for (std::size_t i = 0; i < variants.size(); ++i) {
    for (std::size_t j = i + 1; j < variants.size(); ++j) {
      if (variants[i].name == variants[j].name) {
        throw SpecInvalid("run_variant_grid: duplicate variant: " +
                          variants[i].name);
      }
    }
  }

  AblationTable table;
  table.n_seeds = n_seeds;
  for (const auto& v : variants) {
    VariantOutcome row;
    row.spec = v;
    for (int s = 0; s < n_seeds; ++s) {
      VariantConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(s);
      cfg.dnr = v.dnr;
      cfg.assignment = v.assignment;
      cfg.ratio_c = v.ratio_c;
      const TrainResult res = train(cfg);

      std::vector<Detection> dets;
      for (std::size_t i = 0; i < res.scenes.size(); ++i) {
        const auto scene_dets = predict(res.predictors[i], res.scenes[i],
                                        static_cast<int>(i),
                                        cfg.score_threshold);
        dets.insert(dets.end(), scene_dets.begin(), scene_dets.end());
      }
      dets = nms(dets, cfg.nms_threshold);
      const auto gts = gather_ground_truths(res.scenes);
      const auto report = evaluate_ap(dets, gts, {},
                                      SizeBuckets(cfg.scene_spec.stride));
      row.per_seed.push_back(report);
      row.seed_final_iou_mean.push_back(res.log.rows.back().iou_mean);
      row.seed_final_iou_var.push_back(res.log.rows.back().iou_var);
    }
    const double inv = 1.0 / n_seeds;
    for (int s = 0; s < n_seeds; ++s) {
      row.mean.ap += row.per_seed[s].ap * inv;
      row.mean.ap50 += row.per_seed[s].ap50 * inv;
      row.mean.ap75 += row.per_seed[s].ap75 * inv;
      row.final_iou_mean += row.seed_final_iou_mean[s] * inv;
      row.final_iou_var += row.seed_final_iou_var[s] * inv;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void write_ablation_csv(std::ostream& out, const AblationTable& t) {
  out << "variant,AP,AP50,AP75,final_iou_mean,final_iou_var\n";
  for (const auto& row : t.rows) {
    out << row.spec.name << ',' << fixed6(row.mean.ap) << ','
        << fixed6(row.mean.ap50) << ',' << fixed6(row.mean.ap75) << ','
        << fixed6(row.final_iou_mean) << ',' << fixed6(row.final_iou_var)
        << '\n';
  }
}

}  // namespace boxforge
