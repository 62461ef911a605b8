// affsup: affinity-graph supervision experiments.
//
// Subcommands:
//   run       train one experiment, write log.csv + summary.json
//   sweep     one sub-run per value of loss_form/gamma/lambda
//   recall    recall@K of a ranked pair file against a truth pair file
//   gradcheck finite-difference check of every loss form and scope
//   gen-data  write a synthetic dataset (gaussian CSV or scene files)
//
// Exit codes: 0 ok, 2 config error, 3 data/ingestion error, 4 numeric error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "affsup/data.hpp"
#include "affsup/experiment.hpp"
#include "affsup/gradcheck.hpp"
#include "affsup/kernels.hpp"
#include "affsup/metrics.hpp"
#include "affsup/rng.hpp"

namespace fs = std::filesystem;
using namespace affsup;

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IngestionError*>(&e)) return 3;
  if (dynamic_cast<const DegenerateTargetError*>(&e)) return 3;
  if (dynamic_cast<const UndefinedMetricError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

struct ConfigCli {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    for (const auto& key : config_keys()) {
      cmd->add_option_function<std::string>(
          "--" + key,
          [this, key](const std::string& v) { overrides.emplace_back(key, v); },
          "override config key " + key);
    }
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config_file(config_path);
    } else {
      for (const auto& [k, v] : overrides)
        if (k == "task") cfg = ExperimentConfig::defaults_for(task_from_name(v));
    }
    for (const auto& [k, v] : overrides) apply_kv(cfg, k, v);
    return cfg;
  }
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int cmd_run(const ConfigCli& cli) {
  const ExperimentConfig cfg = cli.resolve();
  const RunResult res = run_experiment(cfg);
  const EpochRow& f = res.log.final_row();
  std::printf("wrote %s and %s\n", res.csv_path.c_str(), res.json_path.c_str());
  std::printf("final: val_acc=%.4f mass=%.4f", f.val_acc, f.mass);
  if (f.has_recall) std::printf(" recall50=%.4f", f.recall50);
  std::printf(" (best val_acc=%.4f @ epoch %d)\n", res.log.best_val_acc,
              res.log.best_epoch);
  return 0;
}

int cmd_sweep(const ConfigCli& cli, const std::string& axis_name,
              const std::string& values_csv) {
  const ExperimentConfig cfg = cli.resolve();
  const SweepAxis axis = sweep_axis_from_name(axis_name);
  const SweepResult res = run_sweep(cfg, axis, split_csv(values_csv));
  std::printf("wrote %s and %s\n", res.merged_csv.c_str(),
              res.summary_json.c_str());
  for (const auto& [value, metric] : res.ranking)
    std::printf("%s=%s -> %.4f\n", sweep_axis_key(axis), value.c_str(), metric);
  return 0;
}

// Pair files: `i j score` per line for predictions, `i j` per line for truth.
int cmd_recall(const std::string& pred_path, const std::string& truth_path,
               const std::string& ks_csv, const std::string& format) {
  std::ifstream pred_in(pred_path);
  if (!pred_in) throw IngestionError("cannot open " + pred_path);
  RecallQuery q;
  std::size_t i, j;
  double score;
  while (pred_in >> i >> j >> score) q.predicted.push_back({i, j, score});
  std::ifstream truth_in(truth_path);
  if (!truth_in) throw IngestionError("cannot open " + truth_path);
  while (truth_in >> i >> j) q.truth.insert(std::minmax(i, j));

  nlohmann::ordered_json j_out;
  std::string csv = "k,recall\n";
  for (const std::string& ks : split_csv(ks_csv)) {
    q.k = std::stoul(ks);
    const double r = recall_at_k(q);
    j_out["recall@" + ks] = r;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s,%.9g\n", ks.c_str(), r);
    csv += buf;
  }
  if (format == "json")
    std::cout << j_out.dump(2) << "\n";
  else
    std::cout << csv;
  return 0;
}

int cmd_gradcheck(int instances, int size, double step, double tol,
                  std::uint64_t seed, const std::string& format) {
  RngStream rng(seed);
  nlohmann::ordered_json j_out = nlohmann::ordered_json::array();
  std::string csv = "loss_form,scope,max_rel_err\n";
  bool ok = true;
  for (const LossForm form : {LossForm::L2, LossForm::SmoothL1, LossForm::Focal,
                              LossForm::RowFocal, LossForm::EntryBCE}) {
    for (const SoftmaxScope scope :
         {SoftmaxScope::MatrixWise, SoftmaxScope::RowWise}) {
      LossConfig cfg;
      cfg.form = form;
      cfg.gamma = 2.0;
      cfg.scope = scope;
      double worst = 0.0;
      for (int t = 0; t < instances; ++t) {
        MatD raw(size, size);
        rng.fill_uniform(raw, -2.0, 2.0);
        TargetMatrix target(size);
        for (int a = 0; a < size; ++a)
          for (int b = 0; b < size; ++b)
            if (a != b && rng.uniform() < 0.3) target.set(a, b);
        if (target.count() == 0) target.set(0, 1);
        const AffinityMatrix<double> aff(raw);
        const auto res = mass_loss(aff, target, cfg);
        const double err = grad_check(
            [&](const MatD& x) {
              return mass_loss(AffinityMatrix<double>(x), target, cfg).loss;
            },
            res.grad_raw, raw, step);
        worst = std::max(worst, err);
      }
      ok = ok && worst < tol;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s,%s,%.3e\n", loss_form_name(form),
                    scope_name(scope), worst);
      csv += buf;
      j_out.push_back({{"loss_form", loss_form_name(form)},
                       {"scope", scope_name(scope)},
                       {"max_rel_err", worst}});
    }
  }
  if (format == "json")
    std::cout << j_out.dump(2) << "\n";
  else
    std::cout << csv;
  if (!ok) throw NumericError("gradient check exceeded tolerance");
  return 0;
}

int cmd_gen_data(const ConfigCli& cli, const std::string& kind) {
  const ExperimentConfig cfg = cli.resolve();
  fs::create_directories(cfg.out);
  if (kind == "gaussian") {
    const Dataset d =
        gen_gaussian_clusters(cfg.classes, cfg.per_class, cfg.dim, cfg.spread,
                              cfg.effective_data_seed());
    const std::string path = (fs::path(cfg.out) / "clusters.csv").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError("cannot write " + path);
    for (std::size_t r = 0; r < d.size(); ++r) {
      for (std::size_t c = 0; c < d.x.cols(); ++c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g,", d.x(r, c));
        out << buf;
      }
      out << d.y[r] << "\n";
    }
    std::printf("wrote %s (%zu samples)\n", path.c_str(), d.size());
    return 0;
  }
  if (kind == "scenes") {
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
    const auto scenes = gen_relation_scenes(gen);
    write_scenes(cfg.out, scenes);
    std::printf("wrote %d scene files to %s\n", gen.num_scenes,
                cfg.out.c_str());
    return 0;
  }
  throw ConfigError("gen-data kind must be gaussian or scenes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"affinity-graph supervision experiments"};
  app.require_subcommand(1);

  ConfigCli run_cfg, sweep_cfg, gen_cfg;
  std::string axis, values;
  std::string pred_path, truth_path, ks = "10,50,100", format = "csv";
  std::string gen_kind = "gaussian";
  int gc_instances = 10, gc_size = 8;
  double gc_step = 1e-5, gc_tol = 1e-4;
  std::uint64_t gc_seed = 1;

  CLI::App* run = app.add_subcommand("run", "train one experiment");
  run_cfg.attach(run);

  CLI::App* sweep = app.add_subcommand("sweep", "run an ablation sweep");
  sweep_cfg.attach(sweep);
  sweep->add_option("--axis", axis, "loss_form | gamma | lambda")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  CLI::App* recall = app.add_subcommand("recall", "recall@K of ranked pairs");
  recall->add_option("--pred", pred_path, "file of `i j score` lines")
      ->required();
  recall->add_option("--truth", truth_path, "file of `i j` lines")->required();
  recall->add_option("-k,--k", ks, "comma-separated K values");
  recall->add_option("--format", format, "csv | json");

  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck_cmd->add_option("--instances", gc_instances, "instances per form");
  gradcheck_cmd->add_option("--size", gc_size, "matrix size N");
  gradcheck_cmd->add_option("--step", gc_step, "finite-difference step");
  gradcheck_cmd->add_option("--tol", gc_tol, "max relative error");
  gradcheck_cmd->add_option("--seed", gc_seed, "rng seed");
  gradcheck_cmd->add_option("--format", format, "csv | json");

  CLI::App* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  gen_cfg.attach(gen);
  gen->add_option("--kind", gen_kind, "gaussian | scenes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_cfg);
    if (sweep->parsed()) return cmd_sweep(sweep_cfg, axis, values);
    if (recall->parsed()) return cmd_recall(pred_path, truth_path, ks, format);
    if (gradcheck_cmd->parsed())
      return cmd_gradcheck(gc_instances, gc_size, gc_step, gc_tol, gc_seed,
                           format);
    if (gen->parsed()) return cmd_gen_data(gen_cfg, gen_kind);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
