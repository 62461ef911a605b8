#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "affsup/affinity.hpp"

namespace affsup {

// Axis-aligned box with a class and an object identity.
struct LabeledBox {
  float x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int class_id = 0;
  int instance_id = 0;

  float width() const { return x1 - x0; }
  float height() const { return y1 - y0; }
  float area() const { return width() * height(); }
};

using BatchLabels = std::vector<int>;

// Intersection over union in [0, 1]; symmetric.
double iou(const LabeledBox& a, const LabeledBox& b);

// T[a,b] = 1 iff labels[a] == labels[b] and a != b.
TargetMatrix target_same_class(const BatchLabels& labels);

enum class TargetMode { DifferentCategory, DifferentInstance };

const char* target_mode_name(TargetMode mode);
TargetMode target_mode_from_name(const std::string& name);

// For each proposal, the index of the highest-IoU ground-truth box with
// IoU > threshold, or -1 when none qualifies. Ties keep the lowest index.
std::vector<int> match_to_gt(const std::vector<LabeledBox>& proposals,
                             const std::vector<LabeledBox>& gt,
                             double iou_thresh);

// T[a,b] = 1 iff proposals a and b match distinct ground-truth objects and
// (DifferentCategory) those objects have different classes, or
// (DifferentInstance) merely differ. Unmatched proposals stay unsupervised.
TargetMatrix target_from_boxes(const std::vector<LabeledBox>& proposals,
                               const std::vector<LabeledBox>& gt,
                               TargetMode mode, double iou_thresh = 0.5);

// Thin constructor for explicit relation lists: symmetric, zero diagonal.
TargetMatrix target_from_pairs(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// Scene text format: one box per line, `kind class_id instance_id x0 y0 x1 y1`
// with kind P (proposal) or G (ground truth).
struct SceneBoxes {
  std::vector<LabeledBox> proposals;
  std::vector<LabeledBox> gts;
};

void write_scene(std::ostream& os, const SceneBoxes& scene);
SceneBoxes read_scene(std::istream& is);

}  // namespace affsup
