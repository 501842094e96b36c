// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boxforge/csv.hpp"
#include "boxforge/oracle_study.hpp"
#include "boxforge/postproc.hpp"
#include "boxforge/scene.hpp"
#include "boxforge/simtrain.hpp"

namespace boxforge::cli {

namespace fs = std::filesystem;

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline std::string scene_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04d.json", index);
  return buf;
}

/// Scene files from a directory, in lexicographic filename order so scene
/// ids are stable.
inline std::vector<Scene> load_scene_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no scene files in " + dir.string());
  std::vector<Scene> scenes;
  scenes.reserve(files.size());
  for (const auto& f : files) scenes.push_back(load_scene(f.string()));
  return scenes;
}

struct TrainOpts {
  std::string out;
  std::string scenes_dir;
  std::uint64_t seed = 0;
  int num_scenes = 6;
  int grid_w = 32, grid_h = 32;
  double stride = 1.0;
  int min_instances = 2, max_instances = 5;
  double min_extent = 6.0, max_extent = 18.0;
  int categories = 3;
  double overlap = 0.25;
  std::string dnr = "on";
  std::string assign = "mean";
  double ratio = 0.5;
  int epochs = 12;
  double lr = 150.0;
  double noise = 0.5;
  double score_threshold = 0.05;
  double nms_threshold = 0.5;

  VariantConfig to_config() const {
    VariantConfig cfg;
    cfg.dnr = dnr == "on";
    if (assign == "mean") cfg.assignment = AssignStrategy::kMean;
    else if (assign == "none") cfg.assignment = AssignStrategy::kNone;
    else if (assign == "pn") cfg.assignment = AssignStrategy::kPN;
    else if (assign == "pni") cfg.assignment = AssignStrategy::kPNI;
    else cfg.assignment = AssignStrategy::kConstantRatio;
    cfg.ratio_c = ratio;
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.seed = seed;
    cfg.init_noise = noise;
    cfg.n_scenes = num_scenes;
    cfg.scene_spec.grid_w = grid_w;
    cfg.scene_spec.grid_h = grid_h;
    cfg.scene_spec.stride = stride;
    cfg.scene_spec.min_instances = min_instances;
    cfg.scene_spec.max_instances = max_instances;
    cfg.scene_spec.min_extent = min_extent;
    cfg.scene_spec.max_extent = max_extent;
    cfg.scene_spec.n_categories = categories;
    cfg.scene_spec.overlap_rate = overlap;
    cfg.score_threshold = score_threshold;
    cfg.nms_threshold = nms_threshold;
    return cfg;
  }
};

inline void add_scene_spec_options(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--grid-w", o.grid_w, "grid width in pixels");
  cmd->add_option("--grid-h", o.grid_h, "grid height in pixels");
  cmd->add_option("--stride", o.stride, "grid stride");
  cmd->add_option("--min-instances", o.min_instances, "min instances per scene");
  cmd->add_option("--max-instances", o.max_instances, "max instances per scene");
  cmd->add_option("--min-extent", o.min_extent, "min instance extent");
  cmd->add_option("--max-extent", o.max_extent, "max instance extent");
  cmd->add_option("--categories", o.categories, "number of categories");
  cmd->add_option("--overlap", o.overlap, "instance overlap rate in [0, 1]");
}

inline void add_train_options(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--scenes", o.scenes_dir, "directory of scene files")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--num-scenes", o.num_scenes, "scenes to generate");
  add_scene_spec_options(cmd, o);
  cmd->add_option("--dnr", o.dnr, "decomposition & recombination loss")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--assign", o.assign, "positive assignment strategy")
      ->check(CLI::IsMember({"mean", "none", "pn", "pni", "constant"}));
  cmd->add_option("--ratio", o.ratio, "ratio c for constant assignment");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_option("--noise", o.noise, "initial multiplicative box noise");
  cmd->add_option("--score-threshold", o.score_threshold,
                  "detection score cut (strictly greater)");
  cmd->add_option("--nms", o.nms_threshold, "NMS IoU threshold");
}

inline void persist_config(CLI::App* cmd, const fs::path& out_dir) {
  write_text(out_dir / "resolved_config.cfg", cmd->config_to_str(true, false));
}

}  // namespace detail

/// Experiment driver. Subcommands: gen, train, ablate, oracle, eval.
/// Exit codes: 0 success, 1 usage error, 2 runtime error.
inline int run(int argc, const char* const* argv) {
  CLI::App app{"synthetic anchor-free detection experiments: box "
               "decomposition & recombination, adaptive assignment"};
  app.require_subcommand(1);

  // ---- gen ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate scene files");
  struct GenOpts {
    std::string out;
    std::uint64_t seed = 0;
    int scenes = 16;
    detail::TrainOpts spec;  // only the scene-spec fields are used
  };
  auto gen_opts = std::make_shared<GenOpts>();
  gen->add_option("--out", gen_opts->out, "output directory")->required();
  gen->add_option("--seed", gen_opts->seed, "base seed; scene i uses seed+i");
  gen->add_option("--scenes", gen_opts->scenes, "number of scenes")
      ->check(CLI::PositiveNumber);
  detail::add_scene_spec_options(gen, gen_opts->spec);
  gen->set_config("--config");
  gen->callback([gen, gen_opts] {
    const auto& o = *gen_opts;
    SceneSpec spec = o.spec.to_config().scene_spec;
    spec.validate();
    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    for (int i = 0; i < o.scenes; ++i) {
      const Scene scene = generate_scene(o.seed + i, spec);
      save_scene(scene, (out_dir / detail::scene_filename(i)).string());
    }
    detail::persist_config(gen, out_dir);
  });

  // ---- train --------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train one variant");
  auto train_opts = std::make_shared<detail::TrainOpts>();
  detail::add_train_options(train_cmd, *train_opts);
  train_cmd->set_config("--config");
  train_cmd->callback([train_cmd, train_opts] {
    const auto& o = *train_opts;
    VariantConfig cfg = o.to_config();
    std::vector<Scene> scenes = o.scenes_dir.empty()
                                    ? make_scenes(cfg)
                                    : detail::load_scene_dir(o.scenes_dir);
    const TrainResult res = train_on(std::move(scenes), cfg);

    const fs::path out_dir(o.out);
    fs::create_directories(out_dir / "scenes");
    for (std::size_t i = 0; i < res.scenes.size(); ++i) {
      save_scene(res.scenes[i],
                 (out_dir / "scenes" / detail::scene_filename(static_cast<int>(i)))
                     .string());
    }
    {
      std::ofstream mcsv(out_dir / "metrics.csv");
      res.log.write_csv(mcsv);
    }
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < res.scenes.size(); ++i) {
      const auto d = predict(res.predictors[i], res.scenes[i],
                             static_cast<int>(i), cfg.score_threshold);
      dets.insert(dets.end(), d.begin(), d.end());
    }
    dets = nms(dets, cfg.nms_threshold);
    {
      std::ofstream dcsv(out_dir / "detections.csv");
      write_detections_csv(dcsv, dets);
    }
    detail::persist_config(train_cmd, out_dir);
  });

  // ---- ablate -------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "train a variant grid");
  struct AblateOpts {
    detail::TrainOpts train;
    std::vector<std::string> variants = {"baseline", "dnr", "consistency",
                                         "both"};
    int seeds = 5;
  };
  auto ab_opts = std::make_shared<AblateOpts>();
  detail::add_train_options(ablate, ab_opts->train);
  ablate->add_option("--variants", ab_opts->variants,
                     "comma-separated variant names")
      ->delimiter(',');
  ablate->add_option("--seeds", ab_opts->seeds, "seeds per variant")
      ->check(CLI::PositiveNumber);
  ablate->set_config("--config");
  ablate->callback([ablate, ab_opts] {
    const auto& o = *ab_opts;
    // Duplicate variant names are a usage error; fail before writing.
    std::set<std::string> seen;
    for (const auto& v : o.variants) {
      if (!seen.insert(v).second) {
        throw CLI::ValidationError("--variants", "duplicate variant: " + v);
      }
    }
    std::vector<VariantSpec> variants;
    for (const auto& v : o.variants) variants.push_back(parse_variant(v));

    const VariantConfig base = o.train.to_config();
    const AblationTable table = run_variant_grid(base, variants, o.seeds);

    const fs::path out_dir(o.train.out);
    fs::create_directories(out_dir);
    {
      std::ofstream acsv(out_dir / "ablation.csv");
      write_ablation_csv(acsv, table);
    }
    {
      std::ofstream pcsv(out_dir / "ablation_per_seed.csv");
      pcsv << "variant,seed,AP,AP50,AP75,final_iou_mean\n";
      for (const auto& row : table.rows) {
        for (int s = 0; s < table.n_seeds; ++s) {
          pcsv << row.spec.name << ',' << s << ','
               << fixed6(row.per_seed[s].ap) << ','
               << fixed6(row.per_seed[s].ap50) << ','
               << fixed6(row.per_seed[s].ap75) << ','
               << fixed6(row.seed_final_iou_mean[s]) << '\n';
        }
      }
    }
    detail::persist_config(ablate, out_dir);
  });

  // ---- oracle -------------------------------------------------------
  auto* oracle = app.add_subcommand(
      "oracle", "ranking vs exhaustive recombination gap study");
  struct OracleOpts {
    std::string out;
    std::string scenes_dir;
    int n = 4;
    int trials = 500;
    std::uint64_t seed = 0;
    int limit = 8;
  };
  auto or_opts = std::make_shared<OracleOpts>();
  oracle->add_option("--out", or_opts->out, "output directory")->required();
  oracle->add_option("--scenes", or_opts->scenes_dir,
                     "draw targets from scene files")
      ->check(CLI::ExistingDirectory);
  oracle->add_option("--n", or_opts->n, "predictions per instance")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--trials", or_opts->trials, "number of instances")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--seed", or_opts->seed, "seed");
  oracle->add_option("--limit", or_opts->limit,
                     "max n for the exhaustive sweep");
  oracle->set_config("--config");
  oracle->callback([oracle, or_opts] {
    const auto& o = *or_opts;
    std::vector<Box> gt_pool;
    if (!o.scenes_dir.empty()) {
      for (const auto& scene : detail::load_scene_dir(o.scenes_dir)) {
        for (const auto& inst : scene.instances) gt_pool.push_back(inst.box);
      }
    }
    const OracleStudy study =
        oracle_study(o.seed, o.n, o.trials, o.limit, gt_pool);

    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    {
      std::ofstream ocsv(out_dir / "oracle.csv");
      ocsv << "trial,n,best_original_iou,rank0_iou,oracle_iou,gap\n";
      for (std::size_t t = 0; t < study.trials.size(); ++t) {
        const auto& tr = study.trials[t];
        ocsv << t << ',' << tr.n << ',' << fixed6(tr.best_original) << ','
             << fixed6(tr.rank0) << ',' << fixed6(tr.oracle) << ','
             << fixed6(tr.gap) << '\n';
      }
    }
    {
      std::ofstream scsv(out_dir / "oracle_summary.csv");
      scsv << "trials,n,mean_gap,max_gap\n";
      scsv << study.trials.size() << ',' << o.n << ','
           << fixed6(study.mean_gap) << ',' << fixed6(study.max_gap) << '\n';
    }
    detail::persist_config(oracle, out_dir);
  });

  // ---- eval ---------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "score detections against scenes");
  struct EvalOpts {
    std::string out;
    std::string dets_file;
    std::string scenes_dir;
    double nms_threshold = 0;  // 0 = detections are already suppressed
  };
  auto ev_opts = std::make_shared<EvalOpts>();
  eval->add_option("--out", ev_opts->out, "output directory")->required();
  eval->add_option("--dets", ev_opts->dets_file, "detections CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--scenes", ev_opts->scenes_dir, "scene directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--nms", ev_opts->nms_threshold,
                   "apply NMS at this IoU before scoring (0 = off)");
  eval->set_config("--config");
  eval->callback([eval, ev_opts] {
    const auto& o = *ev_opts;
    const auto scenes = detail::load_scene_dir(o.scenes_dir);
    std::ifstream din(o.dets_file);
    std::vector<Detection> dets = read_detections_csv(din);
    if (o.nms_threshold > 0) dets = nms(dets, o.nms_threshold);
    const auto gts = gather_ground_truths(scenes);
    const SizeBuckets buckets(scenes.front().stride);
    const APReport report = evaluate_ap(dets, gts, {}, buckets);

    const fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    {
      std::ofstream acsv(out_dir / "ap_report.csv");
      write_ap_report_csv(acsv, report, buckets);
    }
    for (const double thr : {0.5, 0.75}) {
      const auto curve = pr_curve(dets, gts, thr);
      char name[32];
      std::snprintf(name, sizeof name, "pr%.0f.csv", thr * 100);
      std::ofstream pcsv(out_dir / name);
      write_pr_curve_csv(pcsv, curve);
    }
    detail::persist_config(eval, out_dir);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("boxforge");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace boxforge::cli
