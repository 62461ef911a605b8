#include "affsup/targets.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace affsup {

double iou(const LabeledBox& a, const LabeledBox& b) {
  const double ix = std::max(
      0.0, static_cast<double>(std::min(a.x1, b.x1)) - std::max(a.x0, b.x0));
  const double iy = std::max(
      0.0, static_cast<double>(std::min(a.y1, b.y1)) - std::max(a.y0, b.y0));
  const double inter = ix * iy;
  const double uni =
      static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

TargetMatrix target_same_class(const BatchLabels& labels) {
  const std::size_t n = labels.size();
  TargetMatrix t(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (labels[a] == labels[b]) t.set_pair(a, b);
  return t;
}

const char* target_mode_name(TargetMode mode) {
  return mode == TargetMode::DifferentCategory ? "different_category"
                                               : "different_instance";
}

TargetMode target_mode_from_name(const std::string& name) {
  if (name == "different_category") return TargetMode::DifferentCategory;
  if (name == "different_instance") return TargetMode::DifferentInstance;
  throw ConfigError("unknown target mode: " + name);
}

std::vector<int> match_to_gt(const std::vector<LabeledBox>& proposals,
                             const std::vector<LabeledBox>& gt,
                             double iou_thresh) {
  std::vector<int> match(proposals.size(), -1);
  for (std::size_t p = 0; p < proposals.size(); ++p) {
    double best = iou_thresh;  // strict: IoU must exceed the threshold
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double v = iou(proposals[p], gt[g]);
      if (v > best) {
        best = v;
        match[p] = static_cast<int>(g);
      }
    }
  }
  return match;
}

TargetMatrix target_from_boxes(const std::vector<LabeledBox>& proposals,
                               const std::vector<LabeledBox>& gt,
                               TargetMode mode, double iou_thresh) {
  if (proposals.empty())
    throw DegenerateTargetError("target_from_boxes: no proposals");
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0))
    throw ConfigError("target_from_boxes: iou_thresh must be in (0,1)");
  const std::vector<int> match = match_to_gt(proposals, gt, iou_thresh);
  const std::size_t n = proposals.size();
  TargetMatrix t(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (match[a] < 0) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      if (match[b] < 0 || match[a] == match[b]) continue;
      if (mode == TargetMode::DifferentCategory &&
          gt[match[a]].class_id == gt[match[b]].class_id)
        continue;
      t.set_pair(a, b);
    }
  }
  return t;
}

TargetMatrix target_from_pairs(
    std::size_t n,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  TargetMatrix t(n);
  for (const auto& [i, j] : pairs) {
    if (i >= n || j >= n) throw ShapeError("target_from_pairs: index out of range");
    t.set_pair(i, j);
  }
  return t;
}

namespace {

void write_box(std::ostream& os, char kind, const LabeledBox& b) {
  char line[160];
  std::snprintf(line, sizeof line, "%c %d %d %.9g %.9g %.9g %.9g\n", kind,
                b.class_id, b.instance_id, b.x0, b.y0, b.x1, b.y1);
  os << line;
}

}  // namespace

void write_scene(std::ostream& os, const SceneBoxes& scene) {
  for (const auto& b : scene.gts) write_box(os, 'G', b);
  for (const auto& b : scene.proposals) write_box(os, 'P', b);
}

SceneBoxes read_scene(std::istream& is) {
  SceneBoxes scene;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    LabeledBox b;
    if (!(ls >> kind >> b.class_id >> b.instance_id >> b.x0 >> b.y0 >> b.x1 >>
          b.y1) ||
        (kind != "P" && kind != "G"))
      throw IngestionError("scene parse error at line " +
                           std::to_string(lineno));
    if (!(b.x0 < b.x1 && b.y0 < b.y1))
      throw IngestionError("degenerate box at line " + std::to_string(lineno));
    (kind == "P" ? scene.proposals : scene.gts).push_back(b);
  }
  return scene;
}

}  // namespace affsup
