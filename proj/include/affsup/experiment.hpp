#pragma once

#include <string>
#include <vector>

#include "affsup/train.hpp"

namespace affsup {

struct RunResult {
  TrainingLog log;
  std::string csv_path;
  std::string json_path;
};

// Trains per cfg and writes out/log.csv plus out/summary.json.
RunResult run_experiment(const ExperimentConfig& cfg);

enum class SweepAxis { LossForm, Gamma, Lambda };

SweepAxis sweep_axis_from_name(const std::string& name);
const char* sweep_axis_key(SweepAxis axis);

struct SweepArm {
  std::string value;
  bool ok = false;
  std::string error;
  TrainingLog log;
};

struct SweepResult {
  std::vector<SweepArm> arms;
  std::string merged_csv;
  std::string summary_json;
  // (value, final validation metric), best first. The metric is val_acc for
  // the batch task and recall@50 for the relation task.
  std::vector<std::pair<std::string, double>> ranking;
  bool all_ok = true;
};

// One sub-run per value, shared seed, each in out/<axis>_<value>/. A failing
// arm aborts the sweep; completed arms stay on disk and in the result.
SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis,
                      const std::vector<std::string>& values);

}  // namespace affsup
