#include "affsup/train.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "affsup/data.hpp"
#include "affsup/metrics.hpp"
#include "affsup/model.hpp"
#include "affsup/optim.hpp"
#include "affsup/rng.hpp"

namespace fs = std::filesystem;

namespace affsup {

namespace {

SgdConfig sgd_config_from(const ExperimentConfig& cfg) {
  SgdConfig sgd;
  sgd.lr = cfg.lr;
  sgd.momentum = cfg.momentum;
  sgd.weight_decay = cfg.weight_decay;
  sgd.schedule = cfg.parsed_schedule();
  return sgd;
}

// Batch index plan for one epoch. classpair sampling draws classes_per_batch
// classes per batch and batch/classes_per_batch samples from each, cycling
// through seeded per-class pools; shuffle takes consecutive chunks of a
// seeded permutation.
std::vector<std::vector<int>> plan_batches(const Dataset& train,
                                           const ExperimentConfig& cfg,
                                           RngStream& rng) {
  const std::size_t n_batches = train.size() / cfg.batch;
  std::vector<std::vector<int>> batches;
  batches.reserve(n_batches);
  if (cfg.sampler == "shuffle") {
    std::vector<int> perm(train.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    for (std::size_t b = 0; b < n_batches; ++b)
      batches.emplace_back(perm.begin() + b * cfg.batch,
                           perm.begin() + (b + 1) * cfg.batch);
    return batches;
  }
  // classpair
  std::vector<std::vector<int>> pools(train.num_classes);
  for (std::size_t i = 0; i < train.size(); ++i)
    pools[train.y[i]].push_back(static_cast<int>(i));
  for (auto& pool : pools) rng.shuffle(pool.begin(), pool.end());
  std::vector<std::size_t> cursor(train.num_classes, 0);
  std::vector<int> class_seq(train.num_classes);
  std::iota(class_seq.begin(), class_seq.end(), 0);
  rng.shuffle(class_seq.begin(), class_seq.end());
  std::size_t class_cursor = 0;
  const int per_class = cfg.batch / cfg.classes_per_batch;
  for (std::size_t b = 0; b < n_batches; ++b) {
    std::vector<int> batch;
    batch.reserve(cfg.batch);
    for (int c = 0; c < cfg.classes_per_batch; ++c) {
      if (class_cursor == class_seq.size()) {
        rng.shuffle(class_seq.begin(), class_seq.end());
        class_cursor = 0;
      }
      const int cls = class_seq[class_cursor++];
      auto& pool = pools[cls];
      if (pool.empty()) continue;
      for (int s = 0; s < per_class; ++s) {
        if (cursor[cls] == pool.size()) cursor[cls] = 0;
        batch.push_back(pool[cursor[cls]++]);
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

MatF gather_rows(const MatF& x, const std::vector<int>& idx) {
  MatF out(idx.size(), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(x.row(idx[i]), x.cols(), out.row(i));
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& y,
                               const std::vector<int>& idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
  return out;
}

Dataset load_batch_dataset(const ExperimentConfig& cfg) {
  if (cfg.data == "gaussian")
    return gen_gaussian_clusters(cfg.classes, cfg.per_class, cfg.dim,
                                 cfg.spread, cfg.effective_data_seed());
  if (cfg.data == "cifar10") {
    Dataset d = load_cifar10_train(cfg.cifar_dir);
    if (cfg.subsample > 0)
      d = subsample_per_class(d, cfg.subsample, cfg.val_seed);
    return d;
  }
  throw ConfigError("batch task: data must be gaussian or cifar10");
}

void track_best(TrainingLog& log, const EpochRow& row, const MatF& val_repr,
                const std::vector<int>& val_labels, double* best_scatter) {
  if (log.best_epoch < 0 || row.val_acc > log.best_val_acc) {
    log.best_epoch = row.epoch;
    log.best_val_acc = row.val_acc;
    *best_scatter = scatter_ratio(val_repr, val_labels);
  }
}

}  // namespace

TrainingLog train_batch_affinity(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset all = load_batch_dataset(cfg);
  if (all.num_classes < 2)
    throw ConfigError("batch task: need at least 2 classes");
  const TrainValSplit split =
      split_train_val(all.size(), cfg.val_fraction, cfg.val_seed);
  const Dataset train_set = select(all, split.train_idx);
  const Dataset val_set = select(all, split.val_idx);
  if (train_set.size() < static_cast<std::size_t>(cfg.batch))
    throw ConfigError("batch task: training set smaller than one batch");

  RngStream rng(cfg.seed);
  BatchNet net = BatchNet::init(static_cast<int>(all.x.cols()),
                                cfg.model == "mlp" ? cfg.hidden : 0, cfg.emb,
                                all.num_classes, rng);
  const SgdConfig sgd = sgd_config_from(cfg);
  SgdState opt = SgdState::init(net.params(), sgd);

  const bool supervised = cfg.loss.lambda > 0.0;
  TrainingLog log;
  double best_scatter = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.lr = lr_at_epoch(sgd, epoch);
    const auto batches = plan_batches(train_set, cfg, rng);

    double main_sum = 0.0, aff_sum = 0.0, mass_sum = 0.0, acc_sum = 0.0;
    double density_sum = 0.0;
    std::size_t aff_batches = 0;
    for (const auto& idx : batches) {
      MatF x = gather_rows(train_set.x, idx);
      const std::vector<int> y = gather_labels(train_set.y, idx);
      if (cfg.augment && train_set.image3x32x32)
        for (std::size_t i = 0; i < x.rows(); ++i)
          augment_image(x.row(i), rng);

      BatchNetCache cache = batch_forward(net, x);
      MatF d_logits;
      const float main_loss = cross_entropy(cache.logits, y, &d_logits);
      acc_sum += accuracy(cache.logits, y);
      main_sum += main_loss;

      const TargetMatrix target = target_same_class(y);
      const std::size_t n = y.size();
      density_sum += static_cast<double>(target.count()) / (n * n);

      if (target.count() == 0) {
        ++log.skipped_batches;
        std::vector<MatF> grads = batch_backward(net, cache, d_logits, MatF());
        sgd_step(net.params(), grads, opt, sgd);
        continue;
      }

      AffinityMatrix<float> aff = affinity_l2(cache.repr());
      const MassLossResult<float> mass = mass_loss(aff, target, cfg.loss);
      aff_sum += mass.loss;
      mass_sum += mass.report.mass;
      ++aff_batches;

      std::vector<MatF> grads;
      if (supervised && net.hidden > 0) {
        const MatF d_repr =
            affinity_l2_feature_grad(cache.repr(), mass.grad_raw);
        std::vector<MatF> main_grads =
            batch_backward(net, cache, d_logits, MatF());
        MatF zero_logits(d_logits.rows(), d_logits.cols());
        std::vector<MatF> aff_grads =
            batch_backward(net, cache, zero_logits, d_repr);
        grads = combine_losses(main_loss, main_grads, mass.loss, aff_grads,
                               cfg.loss)
                    .second;
      } else {
        grads = batch_backward(net, cache, d_logits, MatF());
      }
      sgd_step(net.params(), grads, opt, sgd);
    }

    EpochRow row;
    row.epoch = epoch;
    row.lr = opt.lr;
    row.main_loss = main_sum / batches.size();
    row.aff_loss = aff_batches ? aff_sum / aff_batches : 0.0;
    row.mass = aff_batches ? mass_sum / aff_batches : 0.0;
    row.train_acc = acc_sum / batches.size();
    BatchNetCache val_cache = batch_forward(net, val_set.x);
    row.val_acc = accuracy(val_cache.logits, val_set.y);
    log.rows.push_back(row);
    track_best(log, row, val_cache.repr(), val_set.y, &best_scatter);
    if (epoch == cfg.epochs - 1) {
      log.target_density = density_sum / batches.size();
      // full-dataset features: the tiny validation split is too noisy here
      BatchNetCache all_cache = batch_forward(net, all.x);
      log.final_scatter_ratio = scatter_ratio(all_cache.repr(), all.y);
    }
  }
  log.best_scatter_ratio = best_scatter;
  if (log.skipped_batches > 0)
    log.notes.push_back("affinity skipped on " +
                        std::to_string(log.skipped_batches) +
                        " batches with empty targets");
  return log;
}

namespace {

std::vector<RelationScene> load_relation_scenes(const ExperimentConfig& cfg) {
  SceneGenConfig gen;
  gen.num_scenes = cfg.scenes;
  gen.objects = cfg.objects;
  gen.proposals_per_object = cfg.proposals_per_object;
  gen.background = cfg.background;
  gen.classes = cfg.classes;
  gen.jitter = cfg.jitter;
  gen.feat_dim = cfg.dim;
  gen.feat_noise = cfg.feat_noise;
  gen.proto_scale = cfg.proto_scale;
  gen.instance_scale = cfg.instance_scale;
  gen.seed = cfg.effective_data_seed();
  if (!cfg.scenes_dir.empty()) return load_scenes(cfg.scenes_dir, gen);
  return gen_relation_scenes(gen);
}

struct SceneEval {
  double recall10 = 0.0, recall50 = 0.0, recall100 = 0.0;
  double acc = 0.0;
  MatF repr;                 // pooled embedding features
  std::vector<int> labels;   // pooled proposal labels
};

SceneEval evaluate_scenes(const RelationNet& net,
                          const std::vector<RelationScene>& scenes,
                          const std::vector<int>& idx,
                          const ExperimentConfig& cfg,
                          const std::vector<std::vector<int>>& matches) {
  const std::vector<std::size_t> ks = cfg.parsed_eval_ks();
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  SceneEval ev;
  std::vector<double> recall_sum(ks.size(), 0.0);
  std::size_t recall_scenes = 0;
  double acc_sum = 0.0;
  std::vector<MatF> reprs;
  for (const int s : idx) {
    const RelationScene& scene = scenes[s];
    RelationCache cache = relation_forward(net, scene.features);
    acc_sum += accuracy(cache.logits, scene.labels);
    reprs.push_back(cache.e);
    ev.labels.insert(ev.labels.end(), scene.labels.begin(), scene.labels.end());
    if (scene.relations.empty()) continue;
    PairSet truth;
    for (const auto& [a, b] : scene.relations)
      truth.insert({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
    const auto ranked = rank_pairs(cache.att.raw, max_k);
    for (std::size_t i = 0; i < ks.size(); ++i)
      recall_sum[i] += covered_recall_at_k(ranked, matches[s], truth, ks[i]);
    ++recall_scenes;
  }
  ev.acc = idx.empty() ? 0.0 : acc_sum / idx.size();
  std::size_t total_rows = 0;
  for (const auto& r : reprs) total_rows += r.rows();
  ev.repr = MatF(total_rows, reprs.empty() ? 0 : reprs[0].cols());
  std::size_t row = 0;
  for (const auto& r : reprs)
    for (std::size_t i = 0; i < r.rows(); ++i, ++row)
      std::copy_n(r.row(i), r.cols(), ev.repr.row(row));
  if (recall_scenes > 0) {
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const double v = recall_sum[i] / recall_scenes;
      if (ks[i] == 10) ev.recall10 = v;
      if (ks[i] == 50) ev.recall50 = v;
      if (ks[i] == 100) ev.recall100 = v;
    }
  }
  return ev;
}

}  // namespace

TrainingLog train_relation_attention(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<RelationScene> scenes = load_relation_scenes(cfg);
  if (scenes.empty()) throw ConfigError("relation task: no scenes");
  const TrainValSplit split =
      split_train_val(scenes.size(), cfg.val_fraction, cfg.val_seed);
  if (split.train_idx.empty())
    throw ConfigError("relation task: empty training split");

  // proposal->gt matching is pure geometry; cache it per scene
  std::vector<std::vector<int>> matches(scenes.size());
  for (std::size_t s = 0; s < scenes.size(); ++s)
    matches[s] = match_to_gt(scenes[s].proposals, scenes[s].gts, cfg.iou_thresh);

  RngStream rng(cfg.seed);
  // one extra class for background proposals
  RelationNet net =
      RelationNet::init(cfg.dim, cfg.hidden, cfg.dk, cfg.classes + 1, rng);
  const SgdConfig sgd = sgd_config_from(cfg);
  SgdState opt = SgdState::init(net.params(), sgd);

  const bool supervised = cfg.loss.lambda > 0.0;
  const TargetMode mode = target_mode_from_name(cfg.target_mode);
  TrainingLog log;
  double best_scatter = 0.0;

  std::vector<int> order = split.train_idx;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.lr = lr_at_epoch(sgd, epoch);
    rng.shuffle(order.begin(), order.end());

    double main_sum = 0.0, aff_sum = 0.0, mass_sum = 0.0, acc_sum = 0.0;
    double density_sum = 0.0;
    std::size_t aff_scenes = 0;
    for (const int s : order) {
      const RelationScene& scene = scenes[s];
      RelationCache cache = relation_forward(net, scene.features);
      MatF d_logits;
      const float main_loss = cross_entropy(cache.logits, scene.labels, &d_logits);
      main_sum += main_loss;
      acc_sum += accuracy(cache.logits, scene.labels);

      const TargetMatrix target =
          target_from_boxes(scene.proposals, scene.gts, mode, cfg.iou_thresh);
      const std::size_t n = scene.labels.size();
      density_sum += static_cast<double>(target.count()) / (n * n);

      if (target.count() == 0) {
        ++log.skipped_batches;
        std::vector<MatF> grads =
            relation_backward(net, cache, d_logits, MatF());
        sgd_step(net.params(), grads, opt, sgd);
        continue;
      }

      AffinityMatrix<float> aff(cache.att.raw);
      const MassLossResult<float> mass = mass_loss(aff, target, cfg.loss);
      aff_sum += mass.loss;
      mass_sum += mass.report.mass;
      ++aff_scenes;

      std::vector<MatF> grads;
      if (supervised) {
        std::vector<MatF> main_grads =
            relation_backward(net, cache, d_logits, MatF());
        MatF zero_logits(d_logits.rows(), d_logits.cols());
        std::vector<MatF> aff_grads =
            relation_backward(net, cache, zero_logits, mass.grad_raw);
        grads = combine_losses(main_loss, main_grads, mass.loss, aff_grads,
                               cfg.loss)
                    .second;
      } else {
        grads = relation_backward(net, cache, d_logits, MatF());
      }
      sgd_step(net.params(), grads, opt, sgd);
    }

    const SceneEval ev =
        evaluate_scenes(net, scenes, split.val_idx, cfg, matches);
    EpochRow row;
    row.epoch = epoch;
    row.lr = opt.lr;
    row.main_loss = main_sum / order.size();
    row.aff_loss = aff_scenes ? aff_sum / aff_scenes : 0.0;
    row.mass = aff_scenes ? mass_sum / aff_scenes : 0.0;
    row.train_acc = acc_sum / order.size();
    row.val_acc = ev.acc;
    row.has_recall = true;
    row.recall10 = ev.recall10;
    row.recall50 = ev.recall50;
    row.recall100 = ev.recall100;
    log.rows.push_back(row);
    track_best(log, row, ev.repr, ev.labels, &best_scatter);
    if (epoch == cfg.epochs - 1) {
      log.target_density = density_sum / order.size();
      log.final_scatter_ratio = scatter_ratio(ev.repr, ev.labels);
    }
  }
  log.best_scatter_ratio = best_scatter;
  if (log.skipped_batches > 0)
    log.notes.push_back("affinity skipped on " +
                        std::to_string(log.skipped_batches) +
                        " scenes with empty targets");
  return log;
}

TrainingLog train(const ExperimentConfig& cfg) {
  return cfg.task == TaskKind::BatchClassification
             ? train_batch_affinity(cfg)
             : train_relation_attention(cfg);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void write_log_csv(const TrainingLog& log, TaskKind task,
                   const std::string& path) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write csv: " + path);
  const bool recall = task == TaskKind::RelationAttention;
  out << "epoch,lr,main_loss,aff_loss,mass,train_acc,val_acc";
  if (recall) out << ",recall10,recall50,recall100";
  out << "\n";
  for (const auto& r : log.rows) {
    out << r.epoch << ',' << fmt(r.lr) << ',' << fmt(r.main_loss) << ','
        << fmt(r.aff_loss) << ',' << fmt(r.mass) << ',' << fmt(r.train_acc)
        << ',' << fmt(r.val_acc);
    if (recall)
      out << ',' << fmt(r.recall10) << ',' << fmt(r.recall50) << ','
          << fmt(r.recall100);
    out << "\n";
  }
}

void write_summary_json(const TrainingLog& log, const ExperimentConfig& cfg,
                        const std::string& path) {
  fs::create_directories(fs::path(path).parent_path());
  nlohmann::ordered_json j;
  nlohmann::ordered_json config;
  for (const auto& key : config_keys()) config[key] = get_kv(cfg, key);
  j["config"] = config;
  j["seed"] = cfg.seed;
  j["epochs"] = log.rows.size();
  j["best"] = {{"epoch", log.best_epoch}, {"val_acc", log.best_val_acc}};
  const EpochRow& f = log.final_row();
  nlohmann::ordered_json fin = {
      {"main_loss", f.main_loss}, {"aff_loss", f.aff_loss},
      {"mass", f.mass},           {"train_acc", f.train_acc},
      {"val_acc", f.val_acc},
  };
  if (f.has_recall) {
    fin["recall10"] = f.recall10;
    fin["recall50"] = f.recall50;
    fin["recall100"] = f.recall100;
  }
  j["final"] = fin;
  j["scatter_ratio_best"] = log.best_scatter_ratio;
  j["scatter_ratio_final"] = log.final_scatter_ratio;
  j["target_density"] = log.target_density;
  j["skipped_batches"] = log.skipped_batches;
  j["notes"] = log.notes;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write json: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace affsup
