// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "boxforge/geometry.hpp"
#include "boxforge/rng.hpp"

using namespace boxforge;

TEST_CASE("area") {
  CHECK(area(Box{0, 0, 10, 10}) == 100.0);
  CHECK(area(Box{0, 0, 0, 10}) == 0.0);
  CHECK(area(Box{2, 3, 7, 9}) == 30.0);
}

TEST_CASE("iou basics") {
  const Box a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box{20, 20, 30, 30}) == 0.0);
  CHECK_THAT(iou(a, Box{5, 5, 15, 15}),
             Catch::Matchers::WithinAbs(25.0 / 175.0, 1e-12));
  // two degenerate boxes: empty union scores 0 by convention
  CHECK(iou(Box{1, 1, 1, 1}, Box{2, 2, 2, 2}) == 0.0);
}

TEST_CASE("iou properties over random boxes") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Box a{rng.uniform(0, 50), rng.uniform(0, 50),
                rng.uniform(50, 100), rng.uniform(50, 100)};
    const Box b{rng.uniform(0, 50), rng.uniform(0, 50),
                rng.uniform(50, 100), rng.uniform(50, 100)};
    const double ab = iou(a, b);
    CHECK(ab == iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(iou(a, a) == 1.0);
    CHECK(giou(a, b) <= ab + 1e-15);
  }
}

TEST_CASE("giou") {
  const Box a{0, 0, 10, 10};
  CHECK(giou(a, a) == 1.0);
  CHECK_THAT(giou(a, Box{5, 5, 15, 15}),
             Catch::Matchers::WithinAbs(25.0 / 175.0 - 50.0 / 225.0, 1e-12));
  CHECK_THAT(giou(Box{0, 0, 1, 1}, Box{2, 0, 3, 1}),
             Catch::Matchers::WithinAbs(-1.0 / 3.0, 1e-12));
}

TEST_CASE("dist_to_box") {
  CHECK(dist_to_box(Point{5, 5}, Distances{5, 5, 5, 5}) == Box{0, 0, 10, 10});
  CHECK(dist_to_box(Point{0, 0}, Distances{0, 0, 0, 0}) == Box{0, 0, 0, 0});
  CHECK(dist_to_box(Point{3, 4}, Distances{1, 2, 5, 6}) == Box{2, 2, 8, 10});
}

TEST_CASE("box_to_dist round trip") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Box b{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(11, 30),
                rng.uniform(11, 30)};
    const Point p{rng.uniform(b.x1, b.x2), rng.uniform(b.y1, b.y2)};
    const Distances d = box_to_dist(p, b);
    CHECK(d.l >= 0);
    CHECK(d.t >= 0);
    CHECK(d.r >= 0);
    CHECK(d.b >= 0);
    CHECK(dist_to_box(p, d) == b);  // exact, no rounding introduced
  }
  CHECK_THROWS_AS(box_to_dist(Point{-1, 5}, Box{0, 0, 10, 10}),
                  PointOutsideBox);
}

TEST_CASE("boundary_deviations") {
  const Box gt{0, 0, 10, 10};
  const Deviations zero = boundary_deviations(gt, gt);
  CHECK(zero.dl == 0);
  CHECK(zero.dr == 0);
  CHECK(zero.db == 0);
  CHECK(zero.dt == 0);

  const Deviations d1 = boundary_deviations(Box{0, 0, 9, 10}, gt);
  CHECK(d1.dl == 0);
  CHECK(d1.dr == 1);
  CHECK(d1.db == 0);
  CHECK(d1.dt == 0);

  const Deviations d2 = boundary_deviations(Box{-1, 2, 11, 8}, gt);
  CHECK(d2.dl == 1);
  CHECK(d2.dr == 1);
  CHECK(d2.db == 2);
  CHECK(d2.dt == 2);
}

TEST_CASE("deviations vanish only at equality") {
  Rng rng(17);
  const Box gt{2, 2, 20, 14};
  for (int i = 0; i < 500; ++i) {
    Box pred{gt.x1 + rng.uniform(-1, 1), gt.y1 + rng.uniform(-1, 1),
             gt.x2 + rng.uniform(-1, 1), gt.y2 + rng.uniform(-1, 1)};
    const Deviations d = boundary_deviations(pred, gt);
    const bool all_zero = d.dl == 0 && d.dr == 0 && d.db == 0 && d.dt == 0;
    CHECK(all_zero == (pred == gt));
  }
}
