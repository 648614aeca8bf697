#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gnnctrl/gnn.hpp"
#include "gnnctrl/train.hpp"
#include "gnnctrl/verify.hpp"

namespace gnnctrl {

// Everything an experiment run depends on. Two bundled presets: desk (small,
// minutes on a laptop) and full (the reference protocol sizes). Every field
// is echoed into the output metadata so a results file pins down its run.
struct ExperimentConfig {
  std::string experiment = "exp2";  // exp1..exp5 or verify
  std::string scale = "desk";

  std::size_t n_nodes = 20;
  std::size_t knn_k = 5;
  std::size_t horizon = 30;
  std::size_t n_realizations = 10;
  std::size_t test_size = 50;
  double a_norm = 0.995;
  double b_norm = 1.0;
  double state_weight = 1.0;
  double control_weight = 1.0;

  TrainConfig train;  // train_size/valid_size/batch/epochs/validate_every

  // exp1 sweep grids.
  std::vector<std::size_t> features = {16, 32, 64};
  std::vector<std::size_t> orders = {2, 3, 4};
  std::vector<double> learning_rates = {0.005, 0.01, 0.05};

  // Architecture and learning rate per controller family (exp2..exp5).
  std::size_t gnn_features = 16;
  std::size_t gnn_order = 4;
  double gnn_lr = 0.01;
  std::size_t gf_features = 64;
  std::size_t gf_order = 4;
  double gf_lr = 0.005;
  std::size_t mlp_hidden_factor = 16;
  double mlp_lr = 0.005;
  std::size_t dmlp_hidden = 16;
  double dmlp_lr = 0.01;

  // exp3: sweep of sys_graph spectral norms plus the longer window used only
  // to classify slow open-loop growth (a factor 1.01^30 never trips the
  // trajectory classifier at the cost horizon).
  std::vector<double> a_norm_grid = {0.95, 0.96, 0.97, 0.98,
                                     0.99, 0.995, 1.0, 1.01};
  std::size_t classify_horizon = 600;

  // exp4: perturbation radii (log-spaced over a decade) and penalty variants.
  std::vector<double> eps_grid = {0.01, 0.017782794100389228,
                                  0.03162277660168379, 0.05623413251903491,
                                  0.1};
  std::vector<PenaltyKind> penalties = {PenaltyKind::None, PenaltyKind::Size,
                                        PenaltyKind::Lipschitz,
                                        PenaltyKind::Both};

  // exp5: first entry is the training size, the rest are transfer targets.
  std::vector<std::size_t> node_grid = {20, 25, 30, 35, 40};

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::size_t workers = 0;        // 0 = hardware concurrency
  double fault_scale = 1.0;       // verify negative control
  bool save_models = true;

  VerifyOptions verify_options() const;
};

ExperimentConfig desk_config();
ExperimentConfig full_config();
void apply_scale(ExperimentConfig& cfg, const std::string& scale);

// "key=value" overrides; lists are comma separated; penalties by name.
// Unknown keys raise InvalidArgumentError.
ExperimentConfig config_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    ExperimentConfig base);
ExperimentConfig config_from_file(const std::filesystem::path& path,
                                  ExperimentConfig base);

// Canonical text form; its fnv1a hash is stamped into every output file.
std::string canonical_config_string(const ExperimentConfig& cfg);
std::string config_hash_hex(const ExperimentConfig& cfg);

// Runs fn(0..count-1) on a pool; any task exception is rethrown (smallest
// index wins) after the pool drains. Results must be written by index.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

// Per-cell evaluation statistics over the test states; normalized costs are
// per-state ratios against the optimal controller.
struct CellStat {
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double stable_ratio = 0.0;
  bool failed = false;  // training aborted; numbers are meaningless
};

struct Exp1Row {
  std::string arch;  // gnn | gf
  std::size_t features = 0;
  std::size_t order = 0;
  double learning_rate = 0.0;
  std::size_t realization = 0;
  CellStat stat;
};

struct Exp1Result {
  std::vector<Exp1Row> rows;
  std::vector<std::string> files;
};

struct Exp2Row {
  std::string controller;
  std::size_t realization = 0;
  std::size_t param_count = 0;
  CellStat stat;
};

struct Exp2Result {
  std::vector<Exp2Row> rows;
  // Controller -> median over per-realization medians of normalized cost.
  std::map<std::string, double> median_normalized;
  std::vector<std::string> files;
};

struct Exp3Row {
  double a_norm = 0.0;
  std::size_t realization = 0;
  CellStat gnn;
  CellStat open_loop;
  bool open_loop_stable_extended = false;  // classified on classify_horizon
  double gnn_final_over_initial = 0.0;     // ||X(T)|| / ||X(0)|| median
};

struct Exp3Result {
  std::vector<Exp3Row> rows;
  std::vector<std::string> files;
};

struct Exp4Row {
  PenaltyKind penalty = PenaltyKind::None;
  double eps = 0.0;
  std::size_t realization = 0;
  bool train_failed = false;
  double xi = 0.0;           // trained controller on the training system
  double stable_ratio = 0.0; // test trajectories on the perturbed system
  double rel_cost_diff = 0.0;  // median over states stable on both systems
  double distance = 0.0;
  bool prop1_holds = false;
  double thm2_max_ratio = 0.0;
  bool thm2_contractive = false;  // max(xi, xi_hat) < 1
};

struct Exp4Result {
  std::vector<Exp4Row> rows;
  std::vector<std::string> files;
};

struct Exp5Row {
  std::string controller;  // gnn_none, gnn_size, ..., gf, dmlp
  std::size_t n_nodes = 0;
  std::size_t realization = 0;
  bool train_failed = false;
  double median_stable = 0.0;  // normalized cost over stable trajectories
  double stable_ratio = 0.0;
};

struct Exp5Result {
  std::vector<Exp5Row> rows;
  std::vector<std::string> files;
};

struct VerifyRunResult {
  std::vector<CampaignResult> campaigns;
  bool passed = false;
  std::vector<std::string> files;
};

Exp1Result run_exp1(const ExperimentConfig& cfg);
Exp2Result run_exp2(const ExperimentConfig& cfg);
Exp3Result run_exp3(const ExperimentConfig& cfg);
Exp4Result run_exp4(const ExperimentConfig& cfg);
Exp5Result run_exp5(const ExperimentConfig& cfg);
VerifyRunResult run_verify(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment; returns a process exit code (nonzero when a
// verify campaign fails or the experiment name is unknown).
int run_experiment(const ExperimentConfig& cfg);

}  // namespace gnnctrl
