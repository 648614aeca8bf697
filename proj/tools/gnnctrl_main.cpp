#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gnnctrl/errors.hpp"
#include "gnnctrl/experiments.hpp"
#include "gnnctrl/serialize.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::string scale;
  std::string out;
  std::string seed;
  std::string workers;
  std::string nodes;
  std::string horizon;
  std::string realizations;
  std::string test_size;
  std::string a_norm;
  std::string eps_grid;
  std::string a_norm_grid;
  std::string features;
  std::string order;
  std::string lr;
  std::string fault_scale;
  bool no_models = false;
  std::vector<std::string> sets;
};

void add_common_options(CLI::App* cmd, CliArgs& a, bool sweep_grids) {
  cmd->add_option("--config", a.config, "key=value config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--scale", a.scale,
                  "preset sizes: desk or full/paper (applied before --config "
                  "and flag overrides)")
      ->check(CLI::IsMember({"desk", "full", "paper"}));
  cmd->add_option("--seed", a.seed, "top-level RNG seed");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--workers", a.workers, "worker threads (0 = all cores)");
  cmd->add_option("--nodes", a.nodes, "number of nodes N");
  cmd->add_option("--horizon", a.horizon, "cost horizon T");
  cmd->add_option("--realizations", a.realizations,
                  "number of system realizations");
  cmd->add_option("--test-size", a.test_size, "test initial states per system");
  cmd->add_option("--a-norm", a.a_norm, "spectral norm of the state matrix");
  cmd->add_option("--eps-grid", a.eps_grid,
                  "comma list of perturbation sizes (exp4)");
  cmd->add_option("--a-norm-grid", a.a_norm_grid,
                  "comma list of state-matrix norms (exp3)");
  if (sweep_grids) {
    cmd->add_option("--features", a.features, "comma list of feature widths");
    cmd->add_option("--order", a.order, "comma list of filter orders");
    cmd->add_option("--lr", a.lr, "comma list of learning rates");
  } else {
    cmd->add_option("--features", a.features, "trained network feature width");
    cmd->add_option("--order", a.order, "trained network filter order");
    cmd->add_option("--lr", a.lr, "trained network learning rate");
  }
  cmd->add_option("--fault-scale", a.fault_scale,
                  "scale the certified bound in the verify negative control")
      ->group("");  // hidden
  cmd->add_flag("--no-models", a.no_models, "skip writing model JSON files");
  cmd->add_option("--set", a.sets, "extra key=value overrides (repeatable)");
}

gnnctrl::ExperimentConfig build_config(const std::string& experiment,
                                       const CliArgs& a, bool sweep_grids) {
  using gnnctrl::ExperimentConfig;
  ExperimentConfig cfg = gnnctrl::desk_config();
  if (!a.scale.empty()) gnnctrl::apply_scale(cfg, a.scale);
  if (!a.config.empty()) cfg = gnnctrl::config_from_file(a.config, cfg);

  std::vector<std::pair<std::string, std::string>> overrides;
  auto push = [&](const char* key, const std::string& value) {
    if (!value.empty()) overrides.emplace_back(key, value);
  };
  push("seed", a.seed);
  push("out_dir", a.out);
  push("workers", a.workers);
  push("n_nodes", a.nodes);
  push("horizon", a.horizon);
  push("n_realizations", a.realizations);
  push("test_size", a.test_size);
  push("a_norm", a.a_norm);
  push("eps_grid", a.eps_grid);
  push("a_norm_grid", a.a_norm_grid);
  if (sweep_grids) {
    push("features", a.features);
    push("orders", a.order);
    push("learning_rates", a.lr);
  } else {
    push("gnn_features", a.features);
    push("gnn_order", a.order);
    push("gnn_lr", a.lr);
  }
  push("fault_scale", a.fault_scale);
  if (a.no_models) overrides.emplace_back("save_models", "0");
  for (const std::string& kv : a.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw gnnctrl::InvalidArgumentError("--set expects key=value: " + kv);
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg = gnnctrl::config_from_pairs(overrides, std::move(cfg));
  cfg.experiment = experiment;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Distributed graph-filter and GNN controllers for networked "
      "linear-quadratic systems"};
  app.set_version_flag("--version", std::string(gnnctrl::kCodeVersion));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* blurb;
    bool sweep_grids;
  };
  static const Sub kSubs[] = {
      {"exp1", "architecture sweep over features, order and learning rate",
       true},
      {"exp2", "controller comparison against the centralized optimum", false},
      {"exp3", "stabilization across state-matrix spectral norms", false},
      {"exp4", "penalty training and support perturbation robustness", false},
      {"exp5", "transfer of trained controllers to larger graphs", false},
      {"verify", "numerical verification campaigns for the bound suite",
       false},
  };

  CliArgs args[6];
  for (std::size_t i = 0; i < 6; ++i)
    add_common_options(app.add_subcommand(kSubs[i].name, kSubs[i].blurb),
                       args[i], kSubs[i].sweep_grids);

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < 6; ++i)
      if (app.got_subcommand(kSubs[i].name))
        return gnnctrl::run_experiment(
            build_config(kSubs[i].name, args[i], kSubs[i].sweep_grids));
    std::fprintf(stderr, "no subcommand\n");
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
