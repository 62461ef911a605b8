#include "affsup/data.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "affsup/rng.hpp"

namespace fs = std::filesystem;

namespace affsup {

namespace {
constexpr float kMeanScale = 3.0f;
constexpr std::size_t kCifarDim = 3072;
constexpr std::size_t kCifarRecord = kCifarDim + 1;
constexpr std::size_t kCifarPerFile = 10000;
}  // namespace

Dataset gen_gaussian_clusters(int num_classes, int per_class, int dim,
                              float spread, std::uint64_t seed) {
  if (!(spread > 0.0f)) throw ConfigError("gen_gaussian_clusters: spread > 0");
  RngStream rng(seed);
  MatF means(num_classes, dim);
  for (int c = 0; c < num_classes; ++c) {
    double norm2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double v = rng.normal();
      means(c, j) = static_cast<float>(v);
      norm2 += v * v;
    }
    const float inv = kMeanScale / static_cast<float>(std::sqrt(norm2));
    kernels::scale(inv, means.row(c), dim);
  }
  Dataset d;
  d.num_classes = num_classes;
  d.x = MatF(static_cast<std::size_t>(num_classes) * per_class, dim);
  d.y.resize(d.x.rows());
  std::size_t row = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int s = 0; s < per_class; ++s, ++row) {
      d.y[row] = c;
      for (int j = 0; j < dim; ++j)
        d.x(row, j) =
            means(c, j) + spread * static_cast<float>(rng.normal());
    }
  }
  return d;
}

TrainValSplit split_train_val(std::size_t n, double val_fraction,
                              std::uint64_t val_seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  RngStream rng(val_seed);
  rng.shuffle(idx.begin(), idx.end());
  const std::size_t n_val = static_cast<std::size_t>(n * val_fraction);
  TrainValSplit split;
  split.val_idx.assign(idx.begin(), idx.begin() + n_val);
  split.train_idx.assign(idx.begin() + n_val, idx.end());
  return split;
}

Dataset select(const Dataset& d, const std::vector<int>& idx) {
  Dataset out;
  out.num_classes = d.num_classes;
  out.image3x32x32 = d.image3x32x32;
  out.x = MatF(idx.size(), d.x.cols());
  out.y.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(d.x.row(idx[i]), d.x.cols(), out.x.row(i));
    out.y[i] = d.y[idx[i]];
  }
  return out;
}

Dataset subsample_per_class(const Dataset& d, int per_class,
                            std::uint64_t seed) {
  if (per_class <= 0) return d;
  std::vector<std::vector<int>> pools(d.num_classes);
  for (std::size_t i = 0; i < d.size(); ++i) pools[d.y[i]].push_back(i);
  RngStream rng(seed);
  std::vector<int> keep;
  for (auto& pool : pools) {
    rng.shuffle(pool.begin(), pool.end());
    const std::size_t take =
        std::min<std::size_t>(pool.size(), static_cast<std::size_t>(per_class));
    keep.insert(keep.end(), pool.begin(), pool.begin() + take);
  }
  std::sort(keep.begin(), keep.end());
  return select(d, keep);
}

namespace {

void load_cifar_file(const fs::path& path, Dataset& d, std::size_t& row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cifar: missing file " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != kCifarRecord * kCifarPerFile)
    throw IngestionError("cifar: truncated or mis-sized file " + path.string());
  in.seekg(0);
  std::vector<unsigned char> buf(size);
  in.read(reinterpret_cast<char*>(buf.data()), size);
  if (!in) throw IngestionError("cifar: read failure on " + path.string());
  for (std::size_t r = 0; r < kCifarPerFile; ++r, ++row) {
    const unsigned char* rec = buf.data() + r * kCifarRecord;
    if (rec[0] > 9)
      throw IngestionError("cifar: bad label in " + path.string());
    d.y[row] = rec[0];
    float* dst = d.x.row(row);
    for (std::size_t j = 0; j < kCifarDim; ++j)
      dst[j] = static_cast<float>(rec[1 + j]) * (1.0f / 255.0f);
  }
}

Dataset load_cifar(const std::vector<fs::path>& files) {
  Dataset d;
  d.num_classes = 10;
  d.image3x32x32 = true;
  d.x = MatF(files.size() * kCifarPerFile, kCifarDim);
  d.y.resize(d.x.rows());
  std::size_t row = 0;
  for (const auto& f : files) load_cifar_file(f, d, row);
  return d;
}

}  // namespace

Dataset load_cifar10_train(const std::string& dir) {
  std::vector<fs::path> files;
  for (int i = 1; i <= 5; ++i)
    files.push_back(fs::path(dir) / ("data_batch_" + std::to_string(i) + ".bin"));
  return load_cifar(files);
}

Dataset load_cifar10_test(const std::string& dir) {
  return load_cifar({fs::path(dir) / "test_batch.bin"});
}

void flip_horizontal(float* img) {
  for (int plane = 0; plane < 3; ++plane)
    for (int r = 0; r < 32; ++r) {
      float* row = img + plane * 1024 + r * 32;
      std::reverse(row, row + 32);
    }
}

void pad4_crop(const float* src, float* dst, int ox, int oy) {
  // Source pixel (r, c) maps from padded coordinates (r + oy - 4, c + ox - 4).
  for (int plane = 0; plane < 3; ++plane)
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c) {
        const int sr = r + oy - 4;
        const int sc = c + ox - 4;
        dst[plane * 1024 + r * 32 + c] =
            (sr >= 0 && sr < 32 && sc >= 0 && sc < 32)
                ? src[plane * 1024 + sr * 32 + sc]
                : 0.0f;
      }
}

void augment_image(float* img, RngStream& rng) {
  if (rng.uniform() < 0.5) flip_horizontal(img);
  const int ox = static_cast<int>(rng.below(9));
  const int oy = static_cast<int>(rng.below(9));
  if (ox == 4 && oy == 4) return;  // identity crop
  std::vector<float> tmp(kCifarDim);
  pad4_crop(img, tmp.data(), ox, oy);
  std::copy(tmp.begin(), tmp.end(), img);
}

namespace {

// Deterministic per-scene streams so features can be re-synthesized for
// scenes loaded from disk.
RngStream scene_geometry_rng(std::uint64_t seed, int scene_idx) {
  return RngStream(seed ^ (0xC2B2AE3D27D4EB4Full * (scene_idx + 1)));
}
RngStream scene_feature_rng(std::uint64_t seed, int scene_idx) {
  return RngStream(seed ^ (0x9E3779B97F4A7C15ull * (scene_idx + 1)));
}

// one prototype per class plus a final row for the background class
MatF class_prototypes(const SceneGenConfig& cfg) {
  RngStream rng(cfg.seed ^ 0xA3C59AC2ull);
  MatF protos(cfg.classes + 1, cfg.feat_dim);
  const float s = cfg.proto_scale / std::sqrt(static_cast<float>(cfg.feat_dim));
  rng.fill_normal(protos, 0.0f, s);
  return protos;
}

void synth_scene_features(RelationScene& scene, const MatF& protos,
                          const SceneGenConfig& cfg, int scene_idx) {
  RngStream rng = scene_feature_rng(cfg.seed, scene_idx);
  const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(cfg.feat_dim));
  MatF offsets(scene.gts.size(), cfg.feat_dim);
  rng.fill_normal(offsets, 0.0f, cfg.instance_scale * inv_sqrt_d);
  scene.features = MatF(scene.proposals.size(), cfg.feat_dim);
  for (std::size_t p = 0; p < scene.proposals.size(); ++p) {
    const int cls = scene.proposals[p].class_id;
    const int obj = scene.proposals[p].instance_id;  // -1 for background
    for (int j = 0; j < cfg.feat_dim; ++j)
      scene.features(p, j) =
          protos(cls, j) + (obj >= 0 ? offsets(obj, j) : 0.0f) +
          cfg.feat_noise * inv_sqrt_d * static_cast<float>(rng.normal());
  }
}

void derive_relations(RelationScene& scene) {
  scene.relations.clear();
  for (std::size_t i = 0; i < scene.gts.size(); ++i)
    for (std::size_t j = i + 1; j < scene.gts.size(); ++j)
      if (scene.gts[i].class_id != scene.gts[j].class_id)
        scene.relations.emplace_back(i, j);
}

}  // namespace

std::vector<RelationScene> gen_relation_scenes(const SceneGenConfig& cfg) {
  if (cfg.objects < 2)
    throw ConfigError("gen_relation_scenes: objects_per_scene >= 2");
  const MatF protos = class_prototypes(cfg);
  std::vector<RelationScene> scenes(cfg.num_scenes);
  for (int s = 0; s < cfg.num_scenes; ++s) {
    RelationScene& scene = scenes[s];
    RngStream rng = scene_geometry_rng(cfg.seed, s);
    // balanced class assignment: classes cycle over objects, then shuffle
    std::vector<int> assign(cfg.objects);
    for (int o = 0; o < cfg.objects; ++o) assign[o] = o % cfg.classes;
    rng.shuffle(assign.begin(), assign.end());
    for (int o = 0; o < cfg.objects; ++o) {
      LabeledBox b;
      const float cx = static_cast<float>(rng.uniform(0.15, 0.85));
      const float cy = static_cast<float>(rng.uniform(0.15, 0.85));
      const float hw = static_cast<float>(rng.uniform(0.05, 0.12));
      const float hh = static_cast<float>(rng.uniform(0.05, 0.12));
      b.x0 = cx - hw;
      b.x1 = cx + hw;
      b.y0 = cy - hh;
      b.y1 = cy + hh;
      b.class_id = assign[o];
      b.instance_id = o;
      scene.gts.push_back(b);
    }
    for (int o = 0; o < cfg.objects; ++o) {
      const LabeledBox& g = scene.gts[o];
      for (int p = 0; p < cfg.proposals_per_object; ++p) {
        LabeledBox b = g;
        const float w = g.width(), h = g.height();
        const float dx = cfg.jitter * w * static_cast<float>(rng.uniform(-0.5, 0.5));
        const float dy = cfg.jitter * h * static_cast<float>(rng.uniform(-0.5, 0.5));
        const float sx = 1.0f + cfg.jitter * static_cast<float>(rng.uniform(-0.3, 0.3));
        const float sy = 1.0f + cfg.jitter * static_cast<float>(rng.uniform(-0.3, 0.3));
        const float cx = 0.5f * (g.x0 + g.x1) + dx;
        const float cy = 0.5f * (g.y0 + g.y1) + dy;
        b.x0 = cx - 0.5f * w * sx;
        b.x1 = cx + 0.5f * w * sx;
        b.y0 = cy - 0.5f * h * sy;
        b.y1 = cy + 0.5f * h * sy;
        scene.proposals.push_back(b);
        scene.labels.push_back(g.class_id);
      }
    }
    // background proposals: random boxes kept clear of every object
    for (int p = 0; p < cfg.background; ++p) {
      LabeledBox b;
      for (int attempt = 0; attempt < 30; ++attempt) {
        const float cx = static_cast<float>(rng.uniform(0.1, 0.9));
        const float cy = static_cast<float>(rng.uniform(0.1, 0.9));
        const float hw = static_cast<float>(rng.uniform(0.04, 0.1));
        const float hh = static_cast<float>(rng.uniform(0.04, 0.1));
        b.x0 = cx - hw;
        b.x1 = cx + hw;
        b.y0 = cy - hh;
        b.y1 = cy + hh;
        double worst = 0.0;
        for (const auto& g : scene.gts) worst = std::max(worst, iou(b, g));
        if (worst <= 0.3) break;
      }
      b.class_id = cfg.classes;  // background class
      b.instance_id = -1;
      scene.proposals.push_back(b);
      scene.labels.push_back(cfg.classes);
    }
    synth_scene_features(scene, protos, cfg, s);
    derive_relations(scene);
  }
  return scenes;
}

void write_scenes(const std::string& dir,
                  const std::vector<RelationScene>& scenes) {
  fs::create_directories(dir);
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%05zu.txt", s);
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw IngestionError("cannot write scene file in " + dir);
    write_scene(out, {scenes[s].proposals, scenes[s].gts});
  }
}

std::vector<RelationScene> load_scenes(const std::string& dir,
                                       const SceneGenConfig& cfg) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir))
    throw IngestionError("scenes: not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IngestionError("scenes: no scene files in " + dir);

  const MatF protos = class_prototypes(cfg);
  std::vector<RelationScene> scenes(files.size());
  for (std::size_t s = 0; s < files.size(); ++s) {
    std::ifstream in(files[s]);
    if (!in) throw IngestionError("scenes: cannot open " + files[s].string());
    SceneBoxes boxes = read_scene(in);
    RelationScene& scene = scenes[s];
    scene.gts = std::move(boxes.gts);
    scene.proposals = std::move(boxes.proposals);
    scene.labels.reserve(scene.proposals.size());
    for (const auto& p : scene.proposals) {
      const bool is_background = p.class_id == cfg.classes && p.instance_id == -1;
      const bool is_object =
          p.class_id >= 0 && p.class_id < cfg.classes && p.instance_id >= 0 &&
          p.instance_id < static_cast<int>(scene.gts.size());
      if (!is_background && !is_object)
        throw IngestionError("scenes: label out of range in " +
                             files[s].string());
      scene.labels.push_back(p.class_id);
    }
    synth_scene_features(scene, protos, cfg, static_cast<int>(s));
    derive_relations(scene);
  }
  return scenes;
}

}  // namespace affsup
