#include "affsup/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "affsup/targets.hpp"

namespace affsup {

const char* task_name(TaskKind task) {
  return task == TaskKind::BatchClassification ? "batch" : "relation";
}

TaskKind task_from_name(const std::string& name) {
  if (name == "batch") return TaskKind::BatchClassification;
  if (name == "relation") return TaskKind::RelationAttention;
  throw ConfigError("unknown task: " + name);
}

ExperimentConfig ExperimentConfig::batch_defaults() {
  ExperimentConfig cfg;
  cfg.task = TaskKind::BatchClassification;
  cfg.loss.form = LossForm::Focal;
  cfg.loss.gamma = 4.0;
  cfg.loss.lambda = 0.1;
  cfg.lr = 0.2f;
  // At this scale weight decay's norm shrink swamps the affinity metric;
  // the mass converges cleanly without it.
  cfg.weight_decay = 0.0f;
  cfg.epochs = 400000;
  return cfg;
}

ExperimentConfig ExperimentConfig::relation_defaults() {
  ExperimentConfig cfg;
  cfg.task = TaskKind::RelationAttention;
  cfg.data = "scenes";
  cfg.classes = 6;
  cfg.model = "mlp";
  cfg.hidden = 16;
  cfg.lr = 0.05f;
  cfg.epochs = 15;
  cfg.val_fraction = 0.2;
  cfg.loss.form = LossForm::Focal;
  cfg.loss.gamma = 2.0;
  cfg.loss.lambda = 0.01;
  return cfg;
}

ExperimentConfig ExperimentConfig::defaults_for(TaskKind task) {
  return task == TaskKind::BatchClassification ? batch_defaults()
                                               : relation_defaults();
}

std::vector<std::pair<int, float>> ExperimentConfig::parsed_schedule() const {
  std::vector<std::pair<int, float>> steps;
  if (lr_schedule.empty()) return steps;
  std::istringstream ss(lr_schedule);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("lr_schedule: expected epoch:lr, got " + item);
    try {
      steps.emplace_back(std::stoi(item.substr(0, colon)),
                         std::stof(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("lr_schedule: cannot parse " + item);
    }
  }
  return steps;
}

std::vector<std::size_t> ExperimentConfig::parsed_eval_ks() const {
  std::vector<std::size_t> ks;
  std::istringstream ss(eval_ks);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v < 1) throw ConfigError("eval_ks: k must be >= 1");
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("eval_ks: cannot parse " + item);
    }
  }
  if (ks.empty()) throw ConfigError("eval_ks: empty");
  return ks;
}

void ExperimentConfig::validate() const {
  loss.validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (loss.lambda > 0.0 && task == TaskKind::BatchClassification && batch < 2)
    throw ConfigError("batch must be >= 2 when affinity supervision is on");
  if (sampler != "shuffle" && sampler != "classpair")
    throw ConfigError("sampler must be shuffle or classpair");
  if (sampler == "classpair") {
    if (classes_per_batch < 1 || classes_per_batch > classes)
      throw ConfigError("classes_per_batch out of range");
    if (batch % classes_per_batch != 0)
      throw ConfigError("batch must be divisible by classes_per_batch");
  }
  if (model != "probe" && model != "mlp")
    throw ConfigError("model must be probe or mlp");
  if (data != "gaussian" && data != "cifar10" && data != "scenes")
    throw ConfigError("data must be gaussian, cifar10 or scenes");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw ConfigError("val_fraction must be in [0, 1)");
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0))
    throw ConfigError("iou_thresh must be in (0, 1)");
  target_mode_from_name(target_mode);
  parsed_schedule();
  parsed_eval_ks();
}

namespace {

int parse_int(const std::string& v) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer: " + v);
  }
}

float parse_float(const std::string& v) {
  try {
    return std::stof(v);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number: " + v);
  }
}

double parse_double(const std::string& v) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number: " + v);
  }
}

std::uint64_t parse_u64(const std::string& v) {
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse seed: " + v);
  }
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("cannot parse bool: " + v);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "task",          "data",          "cifar_dir",
      "scenes_dir",    "classes",       "per_class",
      "dim",           "spread",        "scenes",
      "objects",       "proposals_per_object", "background",
      "jitter",
      "feat_noise",    "proto_scale",   "instance_scale",
      "model",         "hidden",        "dk",
      "emb",
      "loss_form",     "gamma",         "lambda",
      "mass_floor",    "scope",         "bce_normalize",
      "lr",            "momentum",      "weight_decay",
      "lr_schedule",   "batch",         "epochs",
      "sampler",       "classes_per_batch", "seed",
      "data_seed",     "val_seed",      "val_fraction",
      "subsample",     "augment",       "target_mode",
      "iou_thresh",    "eval_ks",       "out"};
  return keys;
}

void apply_kv(ExperimentConfig& cfg, const std::string& key,
              const std::string& value) {
  if (key == "task") cfg.task = task_from_name(value);
  else if (key == "data") cfg.data = value;
  else if (key == "cifar_dir") cfg.cifar_dir = value;
  else if (key == "scenes_dir") cfg.scenes_dir = value;
  else if (key == "classes") cfg.classes = parse_int(value);
  else if (key == "per_class") cfg.per_class = parse_int(value);
  else if (key == "dim") cfg.dim = parse_int(value);
  else if (key == "spread") cfg.spread = parse_float(value);
  else if (key == "scenes") cfg.scenes = parse_int(value);
  else if (key == "objects") cfg.objects = parse_int(value);
  else if (key == "proposals_per_object") cfg.proposals_per_object = parse_int(value);
  else if (key == "background") cfg.background = parse_int(value);
  else if (key == "jitter") cfg.jitter = parse_float(value);
  else if (key == "feat_noise") cfg.feat_noise = parse_float(value);
  else if (key == "proto_scale") cfg.proto_scale = parse_float(value);
  else if (key == "instance_scale") cfg.instance_scale = parse_float(value);
  else if (key == "model") cfg.model = value;
  else if (key == "hidden") cfg.hidden = parse_int(value);
  else if (key == "dk") cfg.dk = parse_int(value);
  else if (key == "emb") cfg.emb = parse_int(value);
  else if (key == "loss_form") cfg.loss.form = loss_form_from_name(value);
  else if (key == "gamma") cfg.loss.gamma = parse_double(value);
  else if (key == "lambda") cfg.loss.lambda = parse_double(value);
  else if (key == "mass_floor") cfg.loss.mass_floor = parse_double(value);
  else if (key == "scope") cfg.loss.scope = scope_from_name(value);
  else if (key == "bce_normalize") cfg.loss.bce_normalize = parse_bool(value);
  else if (key == "lr") cfg.lr = parse_float(value);
  else if (key == "momentum") cfg.momentum = parse_float(value);
  else if (key == "weight_decay") cfg.weight_decay = parse_float(value);
  else if (key == "lr_schedule") cfg.lr_schedule = value;
  else if (key == "batch") cfg.batch = parse_int(value);
  else if (key == "epochs") cfg.epochs = parse_int(value);
  else if (key == "sampler") cfg.sampler = value;
  else if (key == "classes_per_batch") cfg.classes_per_batch = parse_int(value);
  else if (key == "seed") cfg.seed = parse_u64(value);
  else if (key == "data_seed") cfg.data_seed = parse_u64(value);
  else if (key == "val_seed") cfg.val_seed = parse_u64(value);
  else if (key == "val_fraction") cfg.val_fraction = parse_double(value);
  else if (key == "subsample") cfg.subsample = parse_int(value);
  else if (key == "augment") cfg.augment = parse_bool(value);
  else if (key == "target_mode") cfg.target_mode = value;
  else if (key == "iou_thresh") cfg.iou_thresh = parse_double(value);
  else if (key == "eval_ks") cfg.eval_ks = value;
  else if (key == "out") cfg.out = value;
  else throw ConfigError("unknown config key: " + key);
}

std::string get_kv(const ExperimentConfig& cfg, const std::string& key) {
  if (key == "task") return task_name(cfg.task);
  if (key == "data") return cfg.data;
  if (key == "cifar_dir") return cfg.cifar_dir;
  if (key == "scenes_dir") return cfg.scenes_dir;
  if (key == "classes") return std::to_string(cfg.classes);
  if (key == "per_class") return std::to_string(cfg.per_class);
  if (key == "dim") return std::to_string(cfg.dim);
  if (key == "spread") return fmt_double(cfg.spread);
  if (key == "scenes") return std::to_string(cfg.scenes);
  if (key == "objects") return std::to_string(cfg.objects);
  if (key == "proposals_per_object") return std::to_string(cfg.proposals_per_object);
  if (key == "background") return std::to_string(cfg.background);
  if (key == "jitter") return fmt_double(cfg.jitter);
  if (key == "feat_noise") return fmt_double(cfg.feat_noise);
  if (key == "proto_scale") return fmt_double(cfg.proto_scale);
  if (key == "instance_scale") return fmt_double(cfg.instance_scale);
  if (key == "model") return cfg.model;
  if (key == "hidden") return std::to_string(cfg.hidden);
  if (key == "dk") return std::to_string(cfg.dk);
  if (key == "emb") return std::to_string(cfg.emb);
  if (key == "loss_form") return loss_form_name(cfg.loss.form);
  if (key == "gamma") return fmt_double(cfg.loss.gamma);
  if (key == "lambda") return fmt_double(cfg.loss.lambda);
  if (key == "mass_floor") return fmt_double(cfg.loss.mass_floor);
  if (key == "scope") return scope_name(cfg.loss.scope);
  if (key == "bce_normalize") return cfg.loss.bce_normalize ? "true" : "false";
  if (key == "lr") return fmt_double(cfg.lr);
  if (key == "momentum") return fmt_double(cfg.momentum);
  if (key == "weight_decay") return fmt_double(cfg.weight_decay);
  if (key == "lr_schedule") return cfg.lr_schedule;
  if (key == "batch") return std::to_string(cfg.batch);
  if (key == "epochs") return std::to_string(cfg.epochs);
  if (key == "sampler") return cfg.sampler;
  if (key == "classes_per_batch") return std::to_string(cfg.classes_per_batch);
  if (key == "seed") return std::to_string(cfg.seed);
  if (key == "data_seed") return std::to_string(cfg.data_seed);
  if (key == "val_seed") return std::to_string(cfg.val_seed);
  if (key == "val_fraction") return fmt_double(cfg.val_fraction);
  if (key == "subsample") return std::to_string(cfg.subsample);
  if (key == "augment") return cfg.augment ? "true" : "false";
  if (key == "target_mode") return cfg.target_mode;
  if (key == "iou_thresh") return fmt_double(cfg.iou_thresh);
  if (key == "eval_ks") return cfg.eval_ks;
  if (key == "out") return cfg.out;
  throw ConfigError("unknown config key: " + key);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> items;
  std::string line;
  std::size_t lineno = 0;
  TaskKind task = TaskKind::BatchClassification;
  bool saw_task = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto ke = key.find_last_not_of(" \t");
    key = key.substr(0, ke + 1);
    const auto vb = value.find_first_not_of(" \t");
    value = vb == std::string::npos ? "" : value.substr(vb);
    if (key == "task") {
      task = task_from_name(value);
      saw_task = true;
    }
    items.emplace_back(std::move(key), std::move(value));
  }
  ExperimentConfig cfg =
      saw_task ? ExperimentConfig::defaults_for(task) : ExperimentConfig();
  for (const auto& [k, v] : items) apply_kv(cfg, k, v);
  return cfg;
}

}  // namespace affsup
