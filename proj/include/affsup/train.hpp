#pragma once

#include <string>
#include <vector>

#include "affsup/config.hpp"

namespace affsup {

struct EpochRow {
  int epoch = 0;
  double lr = 0.0;
  double main_loss = 0.0;
  double aff_loss = 0.0;
  double mass = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  bool has_recall = false;
  double recall10 = 0.0, recall50 = 0.0, recall100 = 0.0;
};

struct TrainingLog {
  std::vector<EpochRow> rows;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  // Scatter of the graph features, on the best-validation model and on the
  // final model (the latter mirrors the end-of-training feature plots).
  double best_scatter_ratio = 0.0;
  double final_scatter_ratio = 0.0;
  // Mean |S|/N^2 over the final epoch's batches.
  double target_density = 0.0;
  int skipped_batches = 0;  // batches whose target selected nothing
  std::vector<std::string> notes;

  const EpochRow& final_row() const { return rows.back(); }
};

// Mini-batch classification with an L2 batch affinity graph supervised by a
// same-class target.
TrainingLog train_batch_affinity(const ExperimentConfig& cfg);

// Scene classification with an attention head; the affinity loss supervises
// the raw attention scores with a box-derived target. Logs recall@K of the
// ranked score pairs against the scene relation ground truth.
TrainingLog train_relation_attention(const ExperimentConfig& cfg);

TrainingLog train(const ExperimentConfig& cfg);

void write_log_csv(const TrainingLog& log, TaskKind task,
                   const std::string& path);
void write_summary_json(const TrainingLog& log, const ExperimentConfig& cfg,
                        const std::string& path);

}  // namespace affsup
