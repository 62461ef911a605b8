#include "affsup/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace affsup {

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult res;
  res.log = train(cfg);
  fs::create_directories(cfg.out);
  res.csv_path = (fs::path(cfg.out) / "log.csv").string();
  res.json_path = (fs::path(cfg.out) / "summary.json").string();
  write_log_csv(res.log, cfg.task, res.csv_path);
  write_summary_json(res.log, cfg, res.json_path);
  return res;
}

SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "loss_form") return SweepAxis::LossForm;
  if (name == "gamma") return SweepAxis::Gamma;
  if (name == "lambda") return SweepAxis::Lambda;
  throw ConfigError("sweep axis must be loss_form, gamma or lambda");
}

const char* sweep_axis_key(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::LossForm: return "loss_form";
    case SweepAxis::Gamma: return "gamma";
    case SweepAxis::Lambda: return "lambda";
  }
  return "?";
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double final_metric(const TrainingLog& log, TaskKind task) {
  return task == TaskKind::RelationAttention ? log.final_row().recall50
                                             : log.final_row().val_acc;
}

void write_merged_csv(const SweepResult& res, SweepAxis axis, TaskKind task,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write csv: " + path);
  const bool recall = task == TaskKind::RelationAttention;
  out << sweep_axis_key(axis)
      << ",epoch,lr,main_loss,aff_loss,mass,train_acc,val_acc";
  if (recall) out << ",recall10,recall50,recall100";
  out << "\n";
  for (const auto& arm : res.arms) {
    if (!arm.ok) continue;
    for (const auto& r : arm.log.rows) {
      out << arm.value << ',' << r.epoch << ',' << fmt(r.lr) << ','
          << fmt(r.main_loss) << ',' << fmt(r.aff_loss) << ',' << fmt(r.mass)
          << ',' << fmt(r.train_acc) << ',' << fmt(r.val_acc);
      if (recall)
        out << ',' << fmt(r.recall10) << ',' << fmt(r.recall50) << ','
            << fmt(r.recall100);
      out << "\n";
    }
  }
}

void write_sweep_summary(const SweepResult& res, SweepAxis axis, TaskKind task,
                         const std::string& path) {
  nlohmann::ordered_json j;
  j["axis"] = sweep_axis_key(axis);
  j["metric"] =
      task == TaskKind::RelationAttention ? "final_recall50" : "final_val_acc";
  nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
  for (const auto& [value, metric] : res.ranking)
    ranking.push_back({{"value", value}, {"metric", metric}});
  j["ranking"] = ranking;
  nlohmann::ordered_json arms = nlohmann::ordered_json::array();
  for (const auto& arm : res.arms) {
    nlohmann::ordered_json a;
    a["value"] = arm.value;
    a["ok"] = arm.ok;
    if (!arm.ok) a["error"] = arm.error;
    arms.push_back(a);
  }
  j["arms"] = arms;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write json: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis,
                      const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep: no values");
  SweepResult res;
  fs::create_directories(base.out);
  std::exception_ptr failure;
  for (const std::string& value : values) {
    SweepArm arm;
    arm.value = value;
    ExperimentConfig cfg = base;
    apply_kv(cfg, sweep_axis_key(axis), value);
    cfg.out = (fs::path(base.out) /
               (std::string(sweep_axis_key(axis)) + "_" + value))
                  .string();
    try {
      arm.log = run_experiment(cfg).log;
      arm.ok = true;
    } catch (const std::exception& e) {
      arm.error = e.what();
      res.all_ok = false;
      failure = std::current_exception();
    }
    res.arms.push_back(std::move(arm));
    if (!res.all_ok) break;  // abort; completed arms are preserved
  }
  for (const auto& arm : res.arms)
    if (arm.ok)
      res.ranking.emplace_back(arm.value, final_metric(arm.log, base.task));
  std::sort(res.ranking.begin(), res.ranking.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  res.merged_csv = (fs::path(base.out) / "sweep.csv").string();
  res.summary_json = (fs::path(base.out) / "sweep_summary.json").string();
  write_merged_csv(res, axis, base.task, res.merged_csv);
  write_sweep_summary(res, axis, base.task, res.summary_json);
  if (failure) std::rethrow_exception(failure);
  return res;
}

}  // namespace affsup
