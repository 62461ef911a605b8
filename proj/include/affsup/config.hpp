#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "affsup/affinity.hpp"

namespace affsup {

enum class TaskKind { BatchClassification, RelationAttention };

const char* task_name(TaskKind task);
TaskKind task_from_name(const std::string& name);

// Flat key=value experiment description. Every key can come from a config
// file or be overridden by the CLI flag of the same name.
struct ExperimentConfig {
  TaskKind task = TaskKind::BatchClassification;

  // data source: gaussian | cifar10 | scenes
  std::string data = "gaussian";
  std::string cifar_dir;
  std::string scenes_dir;

  // gaussian generator
  int classes = 4;
  int per_class = 24;
  int dim = 16;
  float spread = 1.0f;

  // relation scene generator
  int scenes = 200;
  int objects = 8;
  int proposals_per_object = 2;
  int background = 8;
  float jitter = 0.25f;
  float feat_noise = 0.5f;
  float proto_scale = 2.0f;
  float instance_scale = 1.0f;

  // model
  std::string model = "mlp";  // probe | mlp
  int hidden = 32;
  int dk = 8;
  int emb = 16;  // batch graph head width; 0 builds the graph on hidden

  LossConfig loss;

  // optimizer
  float lr = 0.05f;
  float momentum = 0.9f;
  float weight_decay = 5e-4f;
  std::string lr_schedule;  // "epoch:lr,epoch:lr"

  // loop
  int batch = 32;
  int epochs = 30;
  std::string sampler = "classpair";  // shuffle | classpair
  int classes_per_batch = 2;

  std::uint64_t seed = 1;
  std::uint64_t data_seed = 0;  // 0: derived from seed
  std::uint64_t val_seed = 12345;
  double val_fraction = 0.1;
  int subsample = 0;  // per-class cap for cifar10; 0 keeps everything
  bool augment = false;

  // relation supervision + evaluation
  std::string target_mode = "different_category";
  double iou_thresh = 0.5;
  std::string eval_ks = "10,50,100";

  std::string out = "out";

  static ExperimentConfig batch_defaults();
  static ExperimentConfig relation_defaults();
  static ExperimentConfig defaults_for(TaskKind task);

  std::uint64_t effective_data_seed() const {
    return data_seed != 0 ? data_seed : seed;
  }
  std::vector<std::pair<int, float>> parsed_schedule() const;
  std::vector<std::size_t> parsed_eval_ks() const;
  void validate() const;
};

// All config keys in a stable order (used by the CLI flag table and echoes).
const std::vector<std::string>& config_keys();

// Applies one key=value override; throws ConfigError on unknown keys or
// unparsable values.
void apply_kv(ExperimentConfig& cfg, const std::string& key,
              const std::string& value);

// Reads a flat key=value file ('#' comments). The task key, when present,
// switches the defaults before the remaining keys apply.
ExperimentConfig load_config_file(const std::string& path);

// Value of a key as a string, inverse of apply_kv (for echoes and sweeps).
std::string get_kv(const ExperimentConfig& cfg, const std::string& key);

}  // namespace affsup
