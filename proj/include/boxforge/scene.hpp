// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "boxforge/geometry.hpp"
#include "boxforge/rng.hpp"

namespace boxforge {

struct Instance {
  Box box;
  int category = 0;
};

/// Synthetic ground truth: a point grid plus instances. Grid pixel (ix, iy)
/// sits at (ix * stride, iy * stride); the usable extent is
/// (grid_w - 1, grid_h - 1) in stride units.
struct Scene {
  int grid_w = 0, grid_h = 0;
  double stride = 1.0;
  std::uint64_t seed = 0;
  int n_categories = 1;
  std::vector<Instance> instances;

  double extent_x() const { return (grid_w - 1) * stride; }
  double extent_y() const { return (grid_h - 1) * stride; }
  int n_pixels() const { return grid_w * grid_h; }
};

struct SceneSpec {
  int grid_w = 32, grid_h = 32;
  double stride = 1.0;
  int min_instances = 2, max_instances = 5;
  double min_extent = 6.0, max_extent = 18.0;
  int n_categories = 3;
  double overlap_rate = 0.25;

  void validate() const {
    if (grid_w < 8 || grid_h < 8) throw SpecInvalid("SceneSpec: grid must be at least 8x8");
    if (stride <= 0) throw SpecInvalid("SceneSpec: stride must be positive");
    if (min_instances < 1 || max_instances > 16 || min_instances > max_instances) {
      throw SpecInvalid("SceneSpec: instance count must fit in [1, 16]");
    }
    if (min_extent < 2 || min_extent > max_extent) {
      throw SpecInvalid("SceneSpec: bad extent range");
    }
    const double ext = (std::min(grid_w, grid_h) - 1) * stride;
    if (max_extent > ext) throw SpecInvalid("SceneSpec: max_extent exceeds grid");
    if (n_categories < 1) throw SpecInvalid("SceneSpec: need at least one category");
    if (overlap_rate < 0 || overlap_rate > 1) {
      throw SpecInvalid("SceneSpec: overlap_rate must be in [0, 1]");
    }
  }
};

namespace detail {
inline bool intersects(const Box& a, const Box& b) {
  return intersection_area(a, b) > 0;
}
}  // namespace detail

/// Deterministic scene generation. Instances are sampled inside the grid
/// extent; each one after the first overlaps an already placed instance
/// with probability `overlap_rate`, otherwise it is rejection-sampled
/// disjoint. With overlap_rate == 0 no two boxes intersect.
inline Scene generate_scene(std::uint64_t seed, const SceneSpec& spec) {
  spec.validate();
  Rng rng(seed);
  Scene scene;
  scene.grid_w = spec.grid_w;
  scene.grid_h = spec.grid_h;
  scene.stride = spec.stride;
  scene.seed = seed;
  scene.n_categories = spec.n_categories;

  const int count = rng.uniform_int(spec.min_instances, spec.max_instances);
  const double ext_x = scene.extent_x();
  const double ext_y = scene.extent_y();

  auto sample_box = [&](double* out_w, double* out_h) {
    const double w = rng.uniform(spec.min_extent, spec.max_extent);
    const double h = rng.uniform(spec.min_extent, spec.max_extent);
    *out_w = w;
    *out_h = h;
    const double x1 = rng.uniform(0.0, ext_x - w);
    const double y1 = rng.uniform(0.0, ext_y - h);
    return Box{x1, y1, x1 + w, y1 + h};
  };

  for (int i = 0; i < count; ++i) {
    const int category = rng.uniform_int(0, spec.n_categories - 1);
    const bool want_overlap =
        i > 0 && spec.overlap_rate > 0 && rng.uniform() < spec.overlap_rate;
    Box placed;
    bool ok = false;
    for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
      double w = 0, h = 0;
      Box box = sample_box(&w, &h);
      if (want_overlap) {
        // Re-center on a point inside an existing instance, clamped to the
        // canvas, which guarantees a nonempty intersection with it.
        const auto& anchor =
            scene.instances[rng.uniform_int(0, i - 1)].box;
        const double cx = rng.uniform(anchor.x1, anchor.x2);
        const double cy = rng.uniform(anchor.y1, anchor.y2);
        double x1 = std::clamp(cx - 0.5 * w, 0.0, ext_x - w);
        double y1 = std::clamp(cy - 0.5 * h, 0.0, ext_y - h);
        box = Box{x1, y1, x1 + w, y1 + h};
        ok = detail::intersects(box, anchor);
      } else {
        ok = true;
        for (const auto& other : scene.instances) {
          if (detail::intersects(box, other.box)) {
            ok = false;
            break;
          }
        }
      }
      if (ok) placed = box;
    }
    // A crowded canvas may refuse a disjoint placement; keep what fits.
    if (ok) scene.instances.push_back({placed, category});
  }
  return scene;
}

inline nlohmann::ordered_json scene_to_json(const Scene& s) {
  nlohmann::ordered_json j;
  j["grid"] = {{"width", s.grid_w}, {"height", s.grid_h}};
  j["stride"] = s.stride;
  j["seed"] = s.seed;
  j["categories"] = s.n_categories;
  j["instances"] = nlohmann::ordered_json::array();
  for (const auto& inst : s.instances) {
    j["instances"].push_back({{"x1", inst.box.x1},
                              {"y1", inst.box.y1},
                              {"x2", inst.box.x2},
                              {"y2", inst.box.y2},
                              {"category", inst.category}});
  }
  return j;
}

inline Scene scene_from_json(const nlohmann::json& j) {
  Scene s;
  try {
    s.grid_w = j.at("grid").at("width").get<int>();
    s.grid_h = j.at("grid").at("height").get<int>();
    s.stride = j.at("stride").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.n_categories = j.at("categories").get<int>();
    for (const auto& ji : j.at("instances")) {
      Instance inst;
      inst.box = Box{ji.at("x1").get<double>(), ji.at("y1").get<double>(),
                     ji.at("x2").get<double>(), ji.at("y2").get<double>()};
      inst.category = ji.at("category").get<int>();
      s.instances.push_back(inst);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecInvalid(std::string("scene_from_json: ") + e.what());
  }
  if (s.grid_w < 1 || s.grid_h < 1 || s.stride <= 0 || s.n_categories < 1) {
    throw SpecInvalid("scene_from_json: bad grid");
  }
  for (const auto& inst : s.instances) {
    if (!inst.box.valid() || area(inst.box) <= 0 ||
        inst.box.x1 < 0 || inst.box.y1 < 0 ||
        inst.box.x2 > s.extent_x() || inst.box.y2 > s.extent_y() ||
        inst.category < 0 || inst.category >= s.n_categories) {
      throw SpecInvalid("scene_from_json: instance outside contract");
    }
  }
  return s;
}

inline void save_scene(const Scene& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_scene: cannot open " + path);
  out << scene_to_json(s).dump(2) << "\n";
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_scene: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return scene_from_json(j);
}

}  // namespace boxforge
