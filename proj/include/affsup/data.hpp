#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "affsup/matrix.hpp"
#include "affsup/rng.hpp"
#include "affsup/targets.hpp"

namespace affsup {

struct Dataset {
  MatF x;                 // n x dim
  std::vector<int> y;     // class indices
  int num_classes = 0;
  bool image3x32x32 = false;  // CIFAR layout: 3 planes of 32x32, row-major

  std::size_t size() const { return y.size(); }
};

// Gaussian blobs: class means on random directions (fixed scale), points
// mean + spread * N(0, I). Reproducible by seed.
Dataset gen_gaussian_clusters(int num_classes, int per_class, int dim,
                              float spread, std::uint64_t seed);

struct TrainValSplit {
  std::vector<int> train_idx;
  std::vector<int> val_idx;
};

// Seeded shuffle; first val_fraction of the permutation becomes validation.
TrainValSplit split_train_val(std::size_t n, double val_fraction,
                              std::uint64_t val_seed);

Dataset select(const Dataset& d, const std::vector<int>& idx);

// Keeps per_class samples of each class (seeded choice); per_class <= 0 keeps
// everything.
Dataset subsample_per_class(const Dataset& d, int per_class,
                            std::uint64_t seed);

// CIFAR-10 binary batches: 10000 records of 1 label byte + 3072 image bytes.
// Missing or mis-sized files raise IngestionError naming the file.
Dataset load_cifar10_train(const std::string& dir);
Dataset load_cifar10_test(const std::string& dir);

// In-place horizontal flip of a 3x32x32 planar image; an involution.
void flip_horizontal(float* img);
// 4-pixel zero padding followed by a 32x32 crop at offset (ox, oy) in [0, 8].
void pad4_crop(const float* src, float* dst, int ox, int oy);
// Random flip + pad-and-crop, consuming draws from rng in a fixed order.
void augment_image(float* img, RngStream& rng);

// Synthetic relation scene: ground-truth boxes, jittered proposals labeled by
// their source object, class-correlated proposal features, and the relation
// ground truth (all different-class object pairs).
struct RelationScene {
  std::vector<LabeledBox> gts;
  std::vector<LabeledBox> proposals;
  std::vector<int> labels;  // per-proposal class
  MatF features;            // proposals x feat_dim
  std::vector<std::pair<int, int>> relations;  // gt index pairs, i < j
};

struct SceneGenConfig {
  int num_scenes = 200;
  int objects = 8;
  int proposals_per_object = 2;
  int background = 8;  // unmatched proposals labeled with the background class
  int classes = 6;
  float jitter = 0.25f;
  int feat_dim = 16;
  float feat_noise = 0.5f;
  float proto_scale = 2.0f;
  float instance_scale = 1.0f;
  std::uint64_t seed = 1;
};

std::vector<RelationScene> gen_relation_scenes(const SceneGenConfig& cfg);

// Scene files under dir (scene_00000.txt, ...). Features are not stored; they
// are re-synthesized from the boxes and the generator seed on load.
void write_scenes(const std::string& dir,
                  const std::vector<RelationScene>& scenes);
std::vector<RelationScene> load_scenes(const std::string& dir,
                                       const SceneGenConfig& cfg);

}  // namespace affsup
