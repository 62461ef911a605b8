#include <doctest.h>

#include <sstream>

#include "affsup/rng.hpp"
#include "affsup/targets.hpp"

using namespace affsup;

namespace {

LabeledBox box(float x0, float y0, float x1, float y1, int cls = 0,
               int inst = 0) {
  return {x0, y0, x1, y1, cls, inst};
}

// Independent re-derivation of target_from_boxes with na(i)ve loops.
TargetMatrix oracle_from_boxes(const std::vector<LabeledBox>& props,
                               const std::vector<LabeledBox>& gts,
                               TargetMode mode, double thresh) {
  const std::size_t n = props.size();
  std::vector<int> match(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      double ix = std::max(0.0f, std::min(props[p].x1, gts[g].x1) -
                                     std::max(props[p].x0, gts[g].x0));
      double iy = std::max(0.0f, std::min(props[p].y1, gts[g].y1) -
                                     std::max(props[p].y0, gts[g].y0));
      double inter = ix * iy;
      double uni = props[p].area() + gts[g].area() - inter;
      double v = inter / uni;
      if (v > best_iou) {
        best_iou = v;
        if (v > thresh) match[p] = static_cast<int>(g);
      }
    }
    if (best_iou <= thresh) match[p] = -1;
  }
  TargetMatrix t(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || match[a] < 0 || match[b] < 0) continue;
      if (match[a] == match[b]) continue;
      if (mode == TargetMode::DifferentCategory &&
          gts[match[a]].class_id == gts[match[b]].class_id)
        continue;
      t.set(a, b);
    }
  return t;
}

std::vector<LabeledBox> random_boxes(std::size_t n, RngStream& rng,
                                     int classes) {
  std::vector<LabeledBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    const float x0 = static_cast<float>(rng.uniform(0.0, 0.8));
    const float y0 = static_cast<float>(rng.uniform(0.0, 0.8));
    const float w = static_cast<float>(rng.uniform(0.05, 0.2));
    const float h = static_cast<float>(rng.uniform(0.05, 0.2));
    out.push_back(box(x0, y0, x0 + w, y0 + h,
                      static_cast<int>(rng.below(classes)),
                      static_cast<int>(i)));
  }
  return out;
}

}  // namespace

TEST_CASE("iou examples") {
  const LabeledBox a = box(0, 0, 2, 2);
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, box(5, 5, 6, 6)) == doctest::Approx(0.0));
  // (0,0,2,2) vs (1,1,3,3): intersection 1, union 7
  CHECK(iou(a, box(1, 1, 3, 3)) == doctest::Approx(1.0 / 7).epsilon(1e-12));
  CHECK(iou(box(1, 1, 3, 3), a) == doctest::Approx(1.0 / 7).epsilon(1e-12));
}

TEST_CASE("target_same_class examples") {
  // labels [0,0,1]
  const TargetMatrix t = target_same_class({0, 0, 1});
  CHECK(t.at(0, 1));
  CHECK(t.at(1, 0));
  CHECK_FALSE(t.at(0, 2));
  CHECK_FALSE(t.at(0, 0));
  CHECK(t.count() == 2);

  // all distinct -> empty
  CHECK(target_same_class({0, 1, 2, 3}).count() == 0);

  // all equal, N=4 -> 12 ones
  const TargetMatrix full = target_same_class({5, 5, 5, 5});
  CHECK(full.count() == 12);
  for (std::size_t i = 0; i < 4; ++i) CHECK_FALSE(full.at(i, i));
}

TEST_CASE("target_from_boxes examples") {
  const std::vector<LabeledBox> gts = {box(0, 0, 1, 1, /*cls=*/0, 0),
                                       box(2, 2, 3, 3, /*cls=*/1, 1)};
  // proposals exactly on distinct-class objects
  const std::vector<LabeledBox> props = {box(0, 0, 1, 1, 0, 0),
                                         box(2, 2, 3, 3, 1, 1)};
  const TargetMatrix t =
      target_from_boxes(props, gts, TargetMode::DifferentCategory);
  CHECK(t.at(0, 1));
  CHECK(t.at(1, 0));
  CHECK(t.count() == 2);

  // both proposals on the same object -> empty in both modes
  const std::vector<LabeledBox> same = {box(0, 0, 1, 1), box(0.05f, 0, 1, 1)};
  CHECK(target_from_boxes(same, gts, TargetMode::DifferentCategory).count() ==
        0);
  CHECK(target_from_boxes(same, gts, TargetMode::DifferentInstance).count() ==
        0);

  // same class, different instances: zero vs off-diagonal ones
  const std::vector<LabeledBox> gts_same_class = {box(0, 0, 1, 1, 7, 0),
                                                  box(2, 2, 3, 3, 7, 1)};
  CHECK(target_from_boxes(props, gts_same_class,
                          TargetMode::DifferentCategory)
            .count() == 0);
  CHECK(target_from_boxes(props, gts_same_class,
                          TargetMode::DifferentInstance)
            .count() == 2);

  CHECK_THROWS_AS(target_from_boxes({}, gts, TargetMode::DifferentCategory),
                  DegenerateTargetError);
  // unmatched proposals are simply unsupervised
  const std::vector<LabeledBox> off = {box(9, 9, 10, 10), box(0, 0, 1, 1)};
  CHECK(target_from_boxes(off, gts, TargetMode::DifferentInstance).count() ==
        0);
}

TEST_CASE("target builders: symmetry, superset, monotone shrinkage") {
  RngStream rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const auto gts = random_boxes(4 + rng.below(4), rng, 3);
    const auto props = random_boxes(6 + rng.below(8), rng, 3);
    const TargetMatrix cat =
        target_from_boxes(props, gts, TargetMode::DifferentCategory, 0.3);
    const TargetMatrix inst =
        target_from_boxes(props, gts, TargetMode::DifferentInstance, 0.3);
    const TargetMatrix cat_hi =
        target_from_boxes(props, gts, TargetMode::DifferentCategory, 0.6);
    for (std::size_t i = 0; i < props.size(); ++i) {
      CHECK_FALSE(cat.at(i, i));
      for (std::size_t j = 0; j < props.size(); ++j) {
        CHECK(cat.at(i, j) == cat.at(j, i));
        if (cat.at(i, j)) CHECK(inst.at(i, j));      // superset
        if (cat_hi.at(i, j)) CHECK(cat.at(i, j));    // monotone shrinkage
      }
    }
  }
}

TEST_CASE("target_from_boxes matches a brute-force oracle on 200 scenes") {
  RngStream rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gts = random_boxes(2 + rng.below(6), rng, 4);
    const auto props = random_boxes(2 + rng.below(12), rng, 4);
    const double thresh = rng.uniform(0.2, 0.7);
    for (const TargetMode mode :
         {TargetMode::DifferentCategory, TargetMode::DifferentInstance}) {
      CHECK(target_from_boxes(props, gts, mode, thresh) ==
            oracle_from_boxes(props, gts, mode, thresh));
    }
  }
}

TEST_CASE("target_same_class matches a brute-force oracle on 200 instances") {
  RngStream rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(24);
    BatchLabels labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.below(4));
    const TargetMatrix t = target_same_class(labels);
    TargetMatrix want(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b && labels[a] == labels[b]) want.set(a, b);
    CHECK(t == want);
  }
}

TEST_CASE("target_from_pairs thin constructor") {
  const TargetMatrix t = target_from_pairs(4, {{0, 2}, {1, 3}});
  CHECK(t.at(0, 2));
  CHECK(t.at(2, 0));
  CHECK(t.at(1, 3));
  CHECK(t.count() == 4);
  CHECK_THROWS_AS(target_from_pairs(2, {{0, 5}}), ShapeError);
}

TEST_CASE("scene file round trip") {
  SceneBoxes scene;
  scene.gts = {box(0.1f, 0.2f, 0.4f, 0.5f, 3, 0), box(0.5f, 0.5f, 0.9f, 0.8f, 1, 1)};
  scene.proposals = {box(0.12f, 0.18f, 0.42f, 0.51f, 3, 0)};
  std::stringstream ss;
  write_scene(ss, scene);
  const SceneBoxes back = read_scene(ss);
  REQUIRE(back.gts.size() == 2);
  REQUIRE(back.proposals.size() == 1);
  CHECK(back.gts[0].x0 == scene.gts[0].x0);
  CHECK(back.gts[1].class_id == 1);
  CHECK(back.proposals[0].y1 == scene.proposals[0].y1);

  std::stringstream bad("Q 0 0 0 0 1 1\n");
  CHECK_THROWS_AS(read_scene(bad), IngestionError);
  std::stringstream degenerate("G 0 0 1 1 0 0\n");
  CHECK_THROWS_AS(read_scene(degenerate), IngestionError);
}
