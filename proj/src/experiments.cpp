#include "gnnctrl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/errors.hpp"
#include "gnnctrl/graph.hpp"
#include "gnnctrl/serialize.hpp"
#include "gnnctrl/simulate.hpp"
#include "gnnctrl/stability.hpp"

namespace gnnctrl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Substream tags inside a realization's root stream. Fixed forever: changing
// any of these silently reshuffles every seeded result.
constexpr std::uint64_t kGraphTag = 0x100;
constexpr std::uint64_t kSystemTag = 0x200;
constexpr std::uint64_t kTestTag = 0x300;
constexpr std::uint64_t kInitTag = 0x400;
constexpr std::uint64_t kTrainTag = 0x500;
constexpr std::uint64_t kPerturbTag = 0x600;

std::string fmt_size(std::size_t v) { return std::to_string(v); }

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_penalties(const std::vector<PenaltyKind>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += penalty_to_string(v[i]);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgumentError("bad numeric value for " + key + ": " + value);
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  double v = parse_double(key, value);
  if (v < 0 || v != std::floor(v))
    throw InvalidArgumentError(key + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgumentError("bad integer value for " + key + ": " + value);
  }
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const std::string& part : split_list(value))
    out.push_back(parse_double(key, part));
  if (out.empty()) throw InvalidArgumentError(key + " must be non-empty");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::size_t> out;
  for (const std::string& part : split_list(value))
    out.push_back(parse_size(key, part));
  if (out.empty()) throw InvalidArgumentError(key + " must be non-empty");
  return out;
}

std::vector<PenaltyKind> parse_penalty_list(const std::string& value) {
  std::vector<PenaltyKind> out;
  for (const std::string& part : split_list(value))
    out.push_back(penalty_from_string(part));
  return out;
}

std::vector<std::pair<std::string, std::string>> config_to_pairs(
    const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> p;
  auto add = [&](const char* k, std::string v) { p.emplace_back(k, std::move(v)); };
  add("experiment", cfg.experiment);
  add("scale", cfg.scale);
  add("n_nodes", fmt_size(cfg.n_nodes));
  add("knn_k", fmt_size(cfg.knn_k));
  add("horizon", fmt_size(cfg.horizon));
  add("n_realizations", fmt_size(cfg.n_realizations));
  add("test_size", fmt_size(cfg.test_size));
  add("a_norm", format_double(cfg.a_norm));
  add("b_norm", format_double(cfg.b_norm));
  add("state_weight", format_double(cfg.state_weight));
  add("control_weight", format_double(cfg.control_weight));
  add("train_size", fmt_size(cfg.train.train_size));
  add("valid_size", fmt_size(cfg.train.valid_size));
  add("batch_size", fmt_size(cfg.train.batch_size));
  add("epochs", fmt_size(cfg.train.epochs));
  add("validate_every", fmt_size(cfg.train.validate_every));
  add("penalty", penalty_to_string(cfg.train.penalty));
  add("features", join_sizes(cfg.features));
  add("orders", join_sizes(cfg.orders));
  add("learning_rates", join_doubles(cfg.learning_rates));
  add("gnn_features", fmt_size(cfg.gnn_features));
  add("gnn_order", fmt_size(cfg.gnn_order));
  add("gnn_lr", format_double(cfg.gnn_lr));
  add("gf_features", fmt_size(cfg.gf_features));
  add("gf_order", fmt_size(cfg.gf_order));
  add("gf_lr", format_double(cfg.gf_lr));
  add("mlp_hidden_factor", fmt_size(cfg.mlp_hidden_factor));
  add("mlp_lr", format_double(cfg.mlp_lr));
  add("dmlp_hidden", fmt_size(cfg.dmlp_hidden));
  add("dmlp_lr", format_double(cfg.dmlp_lr));
  add("a_norm_grid", join_doubles(cfg.a_norm_grid));
  add("classify_horizon", fmt_size(cfg.classify_horizon));
  add("eps_grid", join_doubles(cfg.eps_grid));
  add("penalties", join_penalties(cfg.penalties));
  add("node_grid", join_sizes(cfg.node_grid));
  add("seed", std::to_string(cfg.seed));
  add("fault_scale", format_double(cfg.fault_scale));
  add("save_models", cfg.save_models ? "1" : "0");
  // out_dir and workers are runtime environment, not experiment identity;
  // outputs must be byte-identical across worker-pool sizes.
  return p;
}

std::vector<std::pair<std::string, std::string>> csv_metadata(
    const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> meta;
  meta.emplace_back("code_version", kCodeVersion);
  meta.emplace_back("config_hash", config_hash_hex(cfg));
  for (auto& kv : config_to_pairs(cfg))
    meta.emplace_back("cfg." + kv.first, kv.second);
  return meta;
}

std::size_t resolved_workers(const ExperimentConfig& cfg) {
  if (cfg.workers) return cfg.workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

Graph connected_graph(std::size_t n, std::size_t k, RngStream& root) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    RngStream r = root.substream(kGraphTag + attempt);
    Graph g = generate_geometric_graph(n, k, r);
    if (is_connected(g)) return g;
  }
}

// Shared per-realization context: system, quadratic weights, test states and
// the optimal controller's per-state costs (the normalizer).
struct Realization {
  Graph graph;
  DistributedSystem d;
  CostSpec cost;
  std::vector<Matrix> test_states;
  std::vector<double> opt_costs;
  std::unique_ptr<OptimalController> optimal;
  std::uint64_t train_seed = 0;
};

Realization build_realization(const ExperimentConfig& cfg,
                              std::uint64_t stream_id, double a_norm,
                              std::size_t n_nodes) {
  RngStream root(cfg.seed, stream_id);
  Realization R;
  R.graph = connected_graph(n_nodes, cfg.knn_k, root);
  RngStream sys_rng = root.substream(kSystemTag);
  R.d = generate_system(R.graph, a_norm, cfg.b_norm, sys_rng);
  R.cost = make_cost_spec(Matrix::identity(1) * cfg.state_weight,
                          Matrix::identity(1) * cfg.control_weight);
  RngStream test_rng = root.substream(kTestTag);
  R.test_states =
      sample_initial_states(cfg.test_size, n_nodes, R.d.f_dim, test_rng);
  R.optimal = make_optimal_controller(R.d, R.cost);
  EvalSummary s =
      evaluate(*R.optimal, R.d, R.cost, R.test_states, cfg.horizon);
  R.opt_costs = s.costs;
  R.train_seed = root.substream(kTrainTag).next_u64();
  return R;
}

TrainConfig base_train_config(const ExperimentConfig& cfg,
                              const Realization& R, double lr,
                              PenaltyKind penalty) {
  TrainConfig tc = cfg.train;
  tc.horizon = cfg.horizon;
  tc.learning_rate = lr;
  tc.penalty = penalty;
  tc.seed = R.train_seed;
  return tc;
}

std::vector<GnnLayerSpec> controller_arch(std::size_t features,
                                          std::size_t order) {
  // One filter layer lifting 1 -> features, linear readout back to 1.
  return {GnnLayerSpec{1, features, order}, GnnLayerSpec{features, 1, 0}};
}

CellStat stat_from(const EvalSummary& s) {
  return CellStat{s.median, s.mean, s.stddev, s.stable_ratio, false};
}

CellStat failed_stat() { return CellStat{kNaN, kNaN, kNaN, 0.0, true}; }

double median_or_nan(std::vector<double> v) {
  if (v.empty()) return kNaN;
  return median_of(std::move(v));
}

// Training wrapper: a failed run (too many diverged trajectories in one
// batch) marks the cell instead of aborting the sweep.
bool train_cell(Controller& ctrl, const Realization& R, const TrainConfig& tc) {
  try {
    train(ctrl, R.d, R.cost, tc);
    return true;
  } catch (const TrainingFailureError&) {
    return false;
  }
}

std::string bool_cell(bool v) { return v ? "1" : "0"; }

}  // namespace

VerifyOptions ExperimentConfig::verify_options() const {
  VerifyOptions o;
  o.seed = seed;
  o.iss_fault_scale = fault_scale;
  return o;
}

ExperimentConfig desk_config() {
  ExperimentConfig cfg;
  apply_scale(cfg, "desk");
  return cfg;
}

ExperimentConfig full_config() {
  ExperimentConfig cfg;
  apply_scale(cfg, "full");
  return cfg;
}

void apply_scale(ExperimentConfig& cfg, const std::string& scale) {
  // "paper" is accepted as a synonym for the full protocol sizes.
  std::string canon = (scale == "paper") ? "full" : scale;
  if (canon == "desk") {
    cfg.n_nodes = 20;
    cfg.horizon = 30;
    cfg.n_realizations = 10;
    cfg.test_size = 50;
    cfg.train.train_size = 100;
    cfg.train.valid_size = 20;
    cfg.train.batch_size = 20;
    // Twice the reference epoch count: the desk training set is 5x smaller,
    // and near-critical plants need the extra updates to fully contract.
    cfg.train.epochs = 60;
    cfg.train.validate_every = 5;
    cfg.node_grid = {20, 25, 30, 35, 40};
  } else if (canon == "full") {
    cfg.n_nodes = 50;
    cfg.horizon = 50;
    cfg.n_realizations = 100;
    cfg.test_size = 50;
    cfg.train.train_size = 500;
    cfg.train.valid_size = 50;
    cfg.train.batch_size = 20;
    cfg.train.epochs = 30;
    cfg.train.validate_every = 5;
    cfg.node_grid = {50, 63, 75, 87, 100};
  } else {
    throw InvalidArgumentError("unknown scale: " + scale);
  }
  cfg.scale = canon;
}

ExperimentConfig config_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    ExperimentConfig base) {
  ExperimentConfig cfg = std::move(base);
  for (const auto& [key, value] : pairs) {
    if (key == "experiment") cfg.experiment = value;
    else if (key == "scale") apply_scale(cfg, value);
    else if (key == "n_nodes") cfg.n_nodes = parse_size(key, value);
    else if (key == "knn_k") cfg.knn_k = parse_size(key, value);
    else if (key == "horizon") cfg.horizon = parse_size(key, value);
    else if (key == "n_realizations") cfg.n_realizations = parse_size(key, value);
    else if (key == "test_size") cfg.test_size = parse_size(key, value);
    else if (key == "a_norm") cfg.a_norm = parse_double(key, value);
    else if (key == "b_norm") cfg.b_norm = parse_double(key, value);
    else if (key == "state_weight") cfg.state_weight = parse_double(key, value);
    else if (key == "control_weight") cfg.control_weight = parse_double(key, value);
    else if (key == "train_size") cfg.train.train_size = parse_size(key, value);
    else if (key == "valid_size") cfg.train.valid_size = parse_size(key, value);
    else if (key == "batch_size") cfg.train.batch_size = parse_size(key, value);
    else if (key == "epochs") cfg.train.epochs = parse_size(key, value);
    else if (key == "validate_every") cfg.train.validate_every = parse_size(key, value);
    else if (key == "penalty") cfg.train.penalty = penalty_from_string(value);
    else if (key == "features") cfg.features = parse_size_list(key, value);
    else if (key == "orders") cfg.orders = parse_size_list(key, value);
    else if (key == "learning_rates") cfg.learning_rates = parse_double_list(key, value);
    else if (key == "gnn_features") cfg.gnn_features = parse_size(key, value);
    else if (key == "gnn_order") cfg.gnn_order = parse_size(key, value);
    else if (key == "gnn_lr") cfg.gnn_lr = parse_double(key, value);
    else if (key == "gf_features") cfg.gf_features = parse_size(key, value);
    else if (key == "gf_order") cfg.gf_order = parse_size(key, value);
    else if (key == "gf_lr") cfg.gf_lr = parse_double(key, value);
    else if (key == "mlp_hidden_factor") cfg.mlp_hidden_factor = parse_size(key, value);
    else if (key == "mlp_lr") cfg.mlp_lr = parse_double(key, value);
    else if (key == "dmlp_hidden") cfg.dmlp_hidden = parse_size(key, value);
    else if (key == "dmlp_lr") cfg.dmlp_lr = parse_double(key, value);
    else if (key == "a_norm_grid") cfg.a_norm_grid = parse_double_list(key, value);
    else if (key == "classify_horizon") cfg.classify_horizon = parse_size(key, value);
    else if (key == "eps_grid") cfg.eps_grid = parse_double_list(key, value);
    else if (key == "penalties") cfg.penalties = parse_penalty_list(value);
    else if (key == "node_grid") cfg.node_grid = parse_size_list(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "workers") cfg.workers = parse_size(key, value);
    else if (key == "fault_scale") cfg.fault_scale = parse_double(key, value);
    else if (key == "save_models") cfg.save_models = parse_size(key, value) != 0;
    else throw InvalidArgumentError("unknown config key: " + key);
  }
  return cfg;
}

ExperimentConfig config_from_file(const std::filesystem::path& path,
                                  ExperimentConfig base) {
  return config_from_pairs(read_key_value_file(path), std::move(base));
}

std::string canonical_config_string(const ExperimentConfig& cfg) {
  std::string out;
  for (auto& kv : config_to_pairs(cfg)) {
    out += kv.first;
    out += "=";
    out += kv.second;
    out += "\n";
  }
  return out;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a_hash(canonical_config_string(cfg))));
  return buf;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t n_threads = std::min(std::max<std::size_t>(workers, 1), count);
  if (n_threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (std::size_t i = 0; i < count; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

Exp1Result run_exp1(const ExperimentConfig& cfg) {
  if (cfg.features.empty() || cfg.orders.empty() || cfg.learning_rates.empty())
    throw InvalidArgumentError("exp1 needs non-empty sweep grids");

  struct Cell {
    std::string arch;
    std::size_t features;
    std::size_t order;
    double lr;
  };
  std::vector<Cell> cells;
  for (const char* arch : {"gnn", "gf"})
    for (std::size_t f : cfg.features)
      for (std::size_t k : cfg.orders)
        for (double lr : cfg.learning_rates)
          cells.push_back({arch, f, k, lr});

  std::size_t workers = resolved_workers(cfg);
  std::vector<Realization> reals(cfg.n_realizations);
  parallel_for(cfg.n_realizations, workers, [&](std::size_t r) {
    reals[r] = build_realization(cfg, r, cfg.a_norm, cfg.n_nodes);
  });

  Exp1Result out;
  out.rows.resize(cells.size() * cfg.n_realizations);
  parallel_for(out.rows.size(), workers, [&](std::size_t task) {
    std::size_t ci = task / cfg.n_realizations;
    std::size_t r = task % cfg.n_realizations;
    const Cell& c = cells[ci];
    const Realization& R = reals[r];
    RngStream root(cfg.seed, r);
    RngStream init = root.substream(kInitTag + ci);
    auto interval = default_interval({R.d.support});
    auto arch = controller_arch(c.features, c.order);
    std::unique_ptr<Controller> ctrl;
    if (c.arch == "gnn")
      ctrl = make_gnn_controller(
          make_gnn(arch, interval, Nonlinearity::Tanh, init));
    else
      ctrl = make_gf_controller(arch, interval, init);
    TrainConfig tc = base_train_config(cfg, R, c.lr, cfg.train.penalty);
    Exp1Row row{c.arch, c.features, c.order, c.lr, r, {}};
    if (train_cell(*ctrl, R, tc)) {
      row.stat = stat_from(evaluate(*ctrl, R.d, R.cost, R.test_states,
                                    cfg.horizon, &R.opt_costs));
    } else {
      row.stat = failed_stat();
    }
    out.rows[task] = std::move(row);
  });

  auto meta = csv_metadata(cfg);
  std::filesystem::path dir(cfg.out_dir);
  {
    CsvWriter csv(dir / "exp1_realizations.csv", meta,
                  {"arch", "features", "order", "learning_rate", "realization",
                   "failed", "median_norm_cost", "mean_norm_cost",
                   "std_norm_cost", "stable_ratio"});
    for (const Exp1Row& row : out.rows)
      csv.row({row.arch, fmt_size(row.features), fmt_size(row.order),
               format_double(row.learning_rate), fmt_size(row.realization),
               bool_cell(row.stat.failed), format_double(row.stat.median),
               format_double(row.stat.mean), format_double(row.stat.stddev),
               format_double(row.stat.stable_ratio)});
    out.files.push_back((dir / "exp1_realizations.csv").string());
  }

  // Cell aggregate: median/std over per-realization medians plus the same
  // over the pooled per-state population (both flavors are reported since
  // either reading of "median and standard deviation" is defensible).
  struct CellAgg {
    std::vector<double> medians;
    std::vector<double> all;
    double stable_sum = 0.0;
    std::size_t failed = 0;
  };
  std::vector<CellAgg> agg(cells.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
      const Exp1Row& row = out.rows[ci * cfg.n_realizations + r];
      if (row.stat.failed) {
        ++agg[ci].failed;
        continue;
      }
      agg[ci].medians.push_back(row.stat.median);
      agg[ci].all.push_back(row.stat.mean);
      agg[ci].stable_sum += row.stat.stable_ratio;
    }
  }
  {
    CsvWriter csv(dir / "exp1_cells.csv", meta,
                  {"arch", "features", "order", "learning_rate", "n_ok",
                   "median_of_medians", "std_of_medians", "mean_of_means",
                   "stable_ratio_mean", "failed_count"});
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      const Cell& c = cells[ci];
      const CellAgg& a = agg[ci];
      double mean_of_means = kNaN;
      if (!a.all.empty()) {
        mean_of_means = 0.0;
        for (double v : a.all) mean_of_means += v;
        mean_of_means /= static_cast<double>(a.all.size());
      }
      csv.row({c.arch, fmt_size(c.features), fmt_size(c.order),
               format_double(c.lr), fmt_size(a.medians.size()),
               format_double(median_or_nan(a.medians)),
               format_double(a.medians.empty() ? kNaN : stddev_of(a.medians)),
               format_double(mean_of_means),
               format_double(a.medians.empty()
                                 ? kNaN
                                 : a.stable_sum /
                                       static_cast<double>(a.medians.size())),
               fmt_size(a.failed)});
    }
    out.files.push_back((dir / "exp1_cells.csv").string());
  }

  // Best learning rate per (arch, features, order), lowest median wins,
  // ties keep the smaller rate.
  {
    CsvWriter csv(dir / "exp1_table.csv", meta,
                  {"arch", "features", "order", "best_learning_rate",
                   "median_of_medians", "std_of_medians"});
    for (const char* arch : {"gnn", "gf"})
      for (std::size_t f : cfg.features)
        for (std::size_t k : cfg.orders) {
          double best_lr = kNaN, best_med = kNaN, best_std = kNaN;
          for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const Cell& c = cells[ci];
            if (c.arch != arch || c.features != f || c.order != k) continue;
            double med = median_or_nan(agg[ci].medians);
            if (std::isnan(med)) continue;
            if (std::isnan(best_med) || med < best_med) {
              best_med = med;
              best_lr = c.lr;
              best_std =
                  agg[ci].medians.empty() ? kNaN : stddev_of(agg[ci].medians);
            }
          }
          csv.row({arch, fmt_size(f), fmt_size(k), format_double(best_lr),
                   format_double(best_med), format_double(best_std)});
        }
    out.files.push_back((dir / "exp1_table.csv").string());
  }
  return out;
}

Exp2Result run_exp2(const ExperimentConfig& cfg) {
  std::size_t workers = resolved_workers(cfg);
  std::vector<Realization> reals(cfg.n_realizations);
  parallel_for(cfg.n_realizations, workers, [&](std::size_t r) {
    reals[r] = build_realization(cfg, r, cfg.a_norm, cfg.n_nodes);
  });

  static const char* kOrder[] = {"optimal", "mlp", "dmlp", "gnn", "gf",
                                 "open_loop"};
  constexpr std::size_t kControllers = 6;

  Exp2Result out;
  out.rows.resize(kControllers * cfg.n_realizations);
  std::vector<nlohmann::json> models(kControllers);

  parallel_for(cfg.n_realizations, workers, [&](std::size_t r) {
    const Realization& R = reals[r];
    RngStream root(cfg.seed, r);
    auto interval = default_interval({R.d.support});

    auto record = [&](std::size_t which, std::unique_ptr<Controller> ctrl,
                      bool trained_ok) {
      Exp2Row row;
      row.controller = kOrder[which];
      row.realization = r;
      row.param_count = ctrl->parameter_count();
      row.stat = trained_ok
                     ? stat_from(evaluate(*ctrl, R.d, R.cost, R.test_states,
                                          cfg.horizon, &R.opt_costs))
                     : failed_stat();
      out.rows[which * cfg.n_realizations + r] = std::move(row);
      if (r == 0 && trained_ok) models[which] = controller_to_json(*ctrl);
    };

    record(0, R.optimal->clone(), true);

    {
      RngStream init = root.substream(kInitTag + 1);
      auto mlp = make_mlp_controller(cfg.n_nodes, cfg.mlp_hidden_factor, init);
      TrainConfig tc =
          base_train_config(cfg, R, cfg.mlp_lr, PenaltyKind::None);
      bool ok = train_cell(*mlp, R, tc);
      record(1, std::move(mlp), ok);
    }
    {
      RngStream init = root.substream(kInitTag + 2);
      auto dmlp = make_dmlp_controller(cfg.n_nodes, cfg.dmlp_hidden, init);
      TrainConfig tc =
          base_train_config(cfg, R, cfg.dmlp_lr, PenaltyKind::None);
      bool ok = train_cell(*dmlp, R, tc);
      record(2, std::move(dmlp), ok);
    }
    {
      RngStream init = root.substream(kInitTag + 3);
      auto gnn = make_gnn_controller(
          make_gnn(controller_arch(cfg.gnn_features, cfg.gnn_order), interval,
                   Nonlinearity::Tanh, init));
      TrainConfig tc =
          base_train_config(cfg, R, cfg.gnn_lr, cfg.train.penalty);
      bool ok = train_cell(*gnn, R, tc);
      record(3, std::move(gnn), ok);
    }
    {
      RngStream init = root.substream(kInitTag + 4);
      auto gf = make_gf_controller(
          controller_arch(cfg.gf_features, cfg.gf_order), interval, init);
      TrainConfig tc = base_train_config(cfg, R, cfg.gf_lr, cfg.train.penalty);
      bool ok = train_cell(*gf, R, tc);
      record(4, std::move(gf), ok);
    }
    record(5, make_open_loop_controller(R.d.g_dim), true);
  });

  auto meta = csv_metadata(cfg);
  std::filesystem::path dir(cfg.out_dir);
  {
    CsvWriter csv(dir / "exp2_realizations.csv", meta,
                  {"controller", "realization", "failed", "param_count",
                   "median_norm_cost", "mean_norm_cost", "std_norm_cost",
                   "stable_ratio"});
    for (const Exp2Row& row : out.rows)
      csv.row({row.controller, fmt_size(row.realization),
               bool_cell(row.stat.failed), fmt_size(row.param_count),
               format_double(row.stat.median), format_double(row.stat.mean),
               format_double(row.stat.stddev),
               format_double(row.stat.stable_ratio)});
    out.files.push_back((dir / "exp2_realizations.csv").string());
  }

  static const char* kNotes[] = {
      "normalization baseline, cost ratio is 1 by construction",
      "centralized dense baseline",
      "per-node weights, inputs are own state and neighbor mean",
      "parameter count includes the linear readout taps",
      "identity nonlinearity, parameter count includes the readout taps",
      "u = 0"};
  {
    CsvWriter csv(dir / "exp2_summary.csv", meta,
                  {"controller", "param_count", "n_ok", "median_of_medians",
                   "std_of_medians", "stable_ratio_mean", "note"});
    for (std::size_t which = 0; which < kControllers; ++which) {
      std::vector<double> medians;
      double stable_sum = 0.0;
      std::size_t params = 0;
      for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
        const Exp2Row& row = out.rows[which * cfg.n_realizations + r];
        params = row.param_count;
        if (row.stat.failed) continue;
        medians.push_back(row.stat.median);
        stable_sum += row.stat.stable_ratio;
      }
      double med = median_or_nan(medians);
      out.median_normalized[kOrder[which]] = med;
      csv.row({kOrder[which], fmt_size(params), fmt_size(medians.size()),
               format_double(med),
               format_double(medians.empty() ? kNaN : stddev_of(medians)),
               format_double(medians.empty()
                                 ? kNaN
                                 : stable_sum /
                                       static_cast<double>(medians.size())),
               kNotes[which]});
    }
    out.files.push_back((dir / "exp2_summary.csv").string());
  }

  if (cfg.save_models)
    for (std::size_t which = 0; which < kControllers; ++which)
      if (!models[which].is_null()) {
        std::filesystem::path path =
            dir / "models" / (std::string("exp2_") + kOrder[which] + ".json");
        nlohmann::json j = models[which];
        j["code_version"] = kCodeVersion;
        j["config_hash"] = config_hash_hex(cfg);
        write_json_file(path, j);
        out.files.push_back(path.string());
      }
  return out;
}

Exp3Result run_exp3(const ExperimentConfig& cfg) {
  if (cfg.a_norm_grid.empty())
    throw InvalidArgumentError("exp3 needs a non-empty a_norm grid");
  std::size_t workers = resolved_workers(cfg);
  std::size_t n_a = cfg.a_norm_grid.size();

  struct Trace {
    std::vector<double> gnn;
    std::vector<double> open;
  };
  Exp3Result out;
  out.rows.resize(n_a * cfg.n_realizations);
  std::vector<Trace> traces(n_a);  // realization 0, test state 0
  std::vector<nlohmann::json> models(n_a);

  parallel_for(out.rows.size(), workers, [&](std::size_t task) {
    std::size_t ai = task / cfg.n_realizations;
    std::size_t r = task % cfg.n_realizations;
    double a_norm = cfg.a_norm_grid[ai];
    Realization R = build_realization(cfg, r, a_norm, cfg.n_nodes);
    RngStream root(cfg.seed, r);
    RngStream init = root.substream(kInitTag + 7);
    auto interval = default_interval({R.d.support});
    auto gnn = make_gnn_controller(
        make_gnn(controller_arch(cfg.gnn_features, cfg.gnn_order), interval,
                 Nonlinearity::Tanh, init));
    TrainConfig tc = base_train_config(cfg, R, cfg.gnn_lr, cfg.train.penalty);
    bool ok = train_cell(*gnn, R, tc);

    Exp3Row row;
    row.a_norm = a_norm;
    row.realization = r;
    auto open = make_open_loop_controller(R.d.g_dim);
    row.open_loop = stat_from(evaluate(*open, R.d, R.cost, R.test_states,
                                       cfg.horizon, &R.opt_costs));
    if (ok) {
      row.gnn = stat_from(evaluate(*gnn, R.d, R.cost, R.test_states,
                                   cfg.horizon, &R.opt_costs));
      std::vector<double> final_ratios;
      final_ratios.reserve(R.test_states.size());
      for (const Matrix& x0 : R.test_states) {
        TrajectoryRecord rec = rollout(R.d, *gnn, x0, cfg.horizon, R.cost);
        double initial = rec.state_sizes.front();
        final_ratios.push_back(
            initial > 0.0 ? rec.state_sizes.back() / initial : 0.0);
      }
      row.gnn_final_over_initial = median_or_nan(final_ratios);
    } else {
      row.gnn = failed_stat();
      row.gnn_final_over_initial = kNaN;
    }

    // Slow open-loop growth needs a longer window than the cost horizon
    // before the trajectory classifier can see it; majority over the test
    // states keeps the verdict robust to unlucky initial states.
    std::size_t window = std::max(cfg.classify_horizon, cfg.horizon);
    std::size_t stable_votes = 0;
    for (const Matrix& x0 : R.test_states) {
      TrajectoryRecord rec = rollout(R.d, *open, x0, window, R.cost);
      if (rec.stable) ++stable_votes;
    }
    row.open_loop_stable_extended = stable_votes * 2 > R.test_states.size();

    if (r == 0) {
      Trace tr;
      TrajectoryRecord og = rollout(R.d, *open, R.test_states.front(), window,
                                    R.cost);
      tr.open = og.state_sizes;
      if (ok) {
        TrajectoryRecord gg = rollout(R.d, *gnn, R.test_states.front(), window,
                                      R.cost);
        tr.gnn = gg.state_sizes;
        models[ai] = controller_to_json(*gnn);
      }
      traces[ai] = std::move(tr);
    }
    out.rows[task] = std::move(row);
  });

  auto meta = csv_metadata(cfg);
  std::filesystem::path dir(cfg.out_dir);
  {
    CsvWriter csv(dir / "exp3_realizations.csv", meta,
                  {"a_norm", "realization", "gnn_failed", "gnn_median",
                   "gnn_mean", "gnn_std", "gnn_stable_ratio",
                   "gnn_final_over_initial", "open_median", "open_mean",
                   "open_std", "open_stable_ratio",
                   "open_loop_stable_extended"});
    for (const Exp3Row& row : out.rows)
      csv.row({format_double(row.a_norm), fmt_size(row.realization),
               bool_cell(row.gnn.failed), format_double(row.gnn.median),
               format_double(row.gnn.mean), format_double(row.gnn.stddev),
               format_double(row.gnn.stable_ratio),
               format_double(row.gnn_final_over_initial),
               format_double(row.open_loop.median),
               format_double(row.open_loop.mean),
               format_double(row.open_loop.stddev),
               format_double(row.open_loop.stable_ratio),
               bool_cell(row.open_loop_stable_extended)});
    out.files.push_back((dir / "exp3_realizations.csv").string());
  }
  {
    CsvWriter csv(dir / "exp3_summary.csv", meta,
                  {"a_norm", "n_ok", "gnn_median_of_medians", "gnn_mean",
                   "gnn_std_of_medians", "open_median_of_medians", "open_mean",
                   "open_unstable_fraction_extended",
                   "gnn_final_over_initial_median"});
    for (std::size_t ai = 0; ai < n_a; ++ai) {
      std::vector<double> gnn_medians, gnn_means, open_medians, open_means,
          finals;
      std::size_t unstable = 0;
      for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
        const Exp3Row& row = out.rows[ai * cfg.n_realizations + r];
        open_medians.push_back(row.open_loop.median);
        open_means.push_back(row.open_loop.mean);
        if (!row.open_loop_stable_extended) ++unstable;
        if (row.gnn.failed) continue;
        gnn_medians.push_back(row.gnn.median);
        gnn_means.push_back(row.gnn.mean);
        finals.push_back(row.gnn_final_over_initial);
      }
      auto mean_of = [](const std::vector<double>& v) {
        if (v.empty()) return kNaN;
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      csv.row({format_double(cfg.a_norm_grid[ai]),
               fmt_size(gnn_medians.size()),
               format_double(median_or_nan(gnn_medians)),
               format_double(mean_of(gnn_means)),
               format_double(gnn_medians.empty() ? kNaN
                                                 : stddev_of(gnn_medians)),
               format_double(median_or_nan(open_medians)),
               format_double(mean_of(open_means)),
               format_double(static_cast<double>(unstable) /
                             static_cast<double>(cfg.n_realizations)),
               format_double(median_or_nan(finals))});
    }
    out.files.push_back((dir / "exp3_summary.csv").string());
  }
  {
    CsvWriter csv(dir / "exp3_traces.csv", meta,
                  {"a_norm", "controller", "t", "state_size"});
    for (std::size_t ai = 0; ai < n_a; ++ai) {
      for (std::size_t t = 0; t < traces[ai].gnn.size(); ++t)
        csv.row({format_double(cfg.a_norm_grid[ai]), "gnn", fmt_size(t),
                 format_double(traces[ai].gnn[t])});
      for (std::size_t t = 0; t < traces[ai].open.size(); ++t)
        csv.row({format_double(cfg.a_norm_grid[ai]), "open_loop", fmt_size(t),
                 format_double(traces[ai].open[t])});
    }
    out.files.push_back((dir / "exp3_traces.csv").string());
  }
  if (cfg.save_models)
    for (std::size_t ai = 0; ai < n_a; ++ai)
      if (!models[ai].is_null()) {
        std::filesystem::path path =
            dir / "models" / ("exp3_gnn_a" + fmt_size(ai) + ".json");
        nlohmann::json j = models[ai];
        j["code_version"] = kCodeVersion;
        j["config_hash"] = config_hash_hex(cfg);
        j["a_norm"] = cfg.a_norm_grid[ai];
        write_json_file(path, j);
        out.files.push_back(path.string());
      }
  return out;
}

Exp4Result run_exp4(const ExperimentConfig& cfg) {
  if (cfg.eps_grid.empty() || cfg.penalties.empty())
    throw InvalidArgumentError("exp4 needs eps and penalty grids");
  std::size_t workers = resolved_workers(cfg);

  struct Exp4Context {
    Realization base;
    std::vector<DistributedSystem> perturbed;  // one per eps
  };
  std::vector<Exp4Context> ctxs(cfg.n_realizations);
  parallel_for(cfg.n_realizations, workers, [&](std::size_t r) {
    Exp4Context ctx;
    ctx.base = build_realization(cfg, r, cfg.a_norm, cfg.n_nodes);
    RngStream root(cfg.seed, r);
    ctx.perturbed.reserve(cfg.eps_grid.size());
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
      RngStream prng = root.substream(kPerturbTag + e);
      ctx.perturbed.push_back(
          perturb_system(ctx.base.d, cfg.eps_grid[e], prng));
    }
    ctxs[r] = std::move(ctx);
  });

  std::size_t n_var = cfg.penalties.size();
  std::size_t n_eps = cfg.eps_grid.size();
  Exp4Result out;
  out.rows.resize(n_var * cfg.n_realizations * n_eps);
  std::vector<nlohmann::json> models(n_var);

  parallel_for(n_var * cfg.n_realizations, workers, [&](std::size_t task) {
    std::size_t vi = task / cfg.n_realizations;
    std::size_t r = task % cfg.n_realizations;
    const Exp4Context& ctx = ctxs[r];
    const Realization& R = ctx.base;
    RngStream root(cfg.seed, r);
    // Every variant starts from the same initialization so the penalty is
    // the only difference between the trained networks.
    RngStream init = root.substream(kInitTag + 9);
    auto interval = default_interval({R.d.support});
    auto gnn = make_gnn_controller(
        make_gnn(controller_arch(cfg.gnn_features, cfg.gnn_order), interval,
                 Nonlinearity::Tanh, init));
    TrainConfig tc = base_train_config(cfg, R, cfg.gnn_lr, cfg.penalties[vi]);
    bool ok = train_cell(*gnn, R, tc);

    double xi = kNaN;
    EvalSummary base_eval;
    if (ok) {
      xi = stability_constant(R.d, gnn->params()).xi;
      base_eval = evaluate(*gnn, R.d, R.cost, R.test_states, cfg.horizon);
      if (r == 0) models[vi] = controller_to_json(*gnn);
    }

    for (std::size_t e = 0; e < n_eps; ++e) {
      Exp4Row row;
      row.penalty = cfg.penalties[vi];
      row.eps = cfg.eps_grid[e];
      row.realization = r;
      row.train_failed = !ok;
      row.xi = xi;
      if (ok) {
        const DistributedSystem& d_hat = ctx.perturbed[e];
        row.distance = system_distance(R.d, d_hat);
        EvalSummary hat_eval =
            evaluate(*gnn, d_hat, R.cost, R.test_states, cfg.horizon);
        row.stable_ratio = hat_eval.stable_ratio;
        std::vector<double> diffs;
        for (std::size_t s = 0; s < R.test_states.size(); ++s)
          if (base_eval.stable[s] && hat_eval.stable[s] &&
              base_eval.costs[s] > 0.0)
            diffs.push_back(hat_eval.costs[s] / base_eval.costs[s] - 1.0);
        row.rel_cost_diff = median_or_nan(std::move(diffs));
        row.prop1_holds =
            stability_change_bound(R.d, d_hat, gnn->params()).holds;
        DeviationReport dev = deviation_bound(R.d, d_hat, gnn->params(),
                                              R.test_states.front(),
                                              cfg.horizon);
        row.thm2_max_ratio = dev.max_ratio;
        row.thm2_contractive = std::max(dev.xi, dev.xi_hat) < 1.0;
      } else {
        row.stable_ratio = kNaN;
        row.rel_cost_diff = kNaN;
        row.distance = kNaN;
        row.thm2_max_ratio = kNaN;
      }
      out.rows[(vi * cfg.n_realizations + r) * n_eps + e] = std::move(row);
    }
  });

  auto meta = csv_metadata(cfg);
  std::filesystem::path dir(cfg.out_dir);
  {
    CsvWriter csv(dir / "exp4_rows.csv", meta,
                  {"penalty", "eps", "realization", "train_failed", "xi",
                   "distance", "stable_ratio", "rel_cost_diff_median",
                   "prop1_holds", "thm2_max_ratio", "thm2_contractive"});
    for (const Exp4Row& row : out.rows)
      csv.row({penalty_to_string(row.penalty), format_double(row.eps),
               fmt_size(row.realization), bool_cell(row.train_failed),
               format_double(row.xi), format_double(row.distance),
               format_double(row.stable_ratio),
               format_double(row.rel_cost_diff), bool_cell(row.prop1_holds),
               format_double(row.thm2_max_ratio),
               bool_cell(row.thm2_contractive)});
    out.files.push_back((dir / "exp4_rows.csv").string());
  }
  {
    CsvWriter csv(dir / "exp4_summary.csv", meta,
                  {"penalty", "eps", "n_ok", "stable_ratio_mean",
                   "rel_cost_diff_median", "xi_median", "prop1_violations",
                   "thm2_worst_ratio"});
    for (std::size_t vi = 0; vi < n_var; ++vi)
      for (std::size_t e = 0; e < n_eps; ++e) {
        std::vector<double> ratios, diffs, xis;
        std::size_t prop1_bad = 0;
        double worst = 0.0;
        for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
          const Exp4Row& row =
              out.rows[(vi * cfg.n_realizations + r) * n_eps + e];
          if (row.train_failed) continue;
          ratios.push_back(row.stable_ratio);
          if (!std::isnan(row.rel_cost_diff))
            diffs.push_back(row.rel_cost_diff);
          xis.push_back(row.xi);
          if (!row.prop1_holds) ++prop1_bad;
          worst = std::max(worst, row.thm2_max_ratio);
        }
        double ratio_mean = kNaN;
        if (!ratios.empty()) {
          ratio_mean = 0.0;
          for (double v : ratios) ratio_mean += v;
          ratio_mean /= static_cast<double>(ratios.size());
        }
        csv.row({penalty_to_string(cfg.penalties[vi]),
                 format_double(cfg.eps_grid[e]), fmt_size(ratios.size()),
                 format_double(ratio_mean),
                 format_double(median_or_nan(std::move(diffs))),
                 format_double(median_or_nan(std::move(xis))),
                 fmt_size(prop1_bad), format_double(worst)});
      }
    out.files.push_back((dir / "exp4_summary.csv").string());
  }
  if (cfg.save_models)
    for (std::size_t vi = 0; vi < n_var; ++vi)
      if (!models[vi].is_null()) {
        std::filesystem::path path =
            dir / "models" /
            ("exp4_gnn_" + penalty_to_string(cfg.penalties[vi]) + ".json");
        nlohmann::json j = models[vi];
        j["code_version"] = kCodeVersion;
        j["config_hash"] = config_hash_hex(cfg);
        write_json_file(path, j);
        out.files.push_back(path.string());
      }
  return out;
}

Exp5Result run_exp5(const ExperimentConfig& cfg) {
  if (cfg.node_grid.empty())
    throw InvalidArgumentError("exp5 needs a node grid");
  std::size_t workers = resolved_workers(cfg);
  std::size_t base_n = cfg.node_grid.front();

  struct Exp5Context {
    Realization base;
    std::vector<Realization> transfer;  // aligned with node_grid
  };
  std::vector<Exp5Context> ctxs(cfg.n_realizations);
  parallel_for(cfg.n_realizations, workers, [&](std::size_t r) {
    Exp5Context ctx;
    ctx.base = build_realization(cfg, r, cfg.a_norm, base_n);
    ctx.transfer.resize(cfg.node_grid.size());
    for (std::size_t ni = 1; ni < cfg.node_grid.size(); ++ni) {
      std::uint64_t stream_id =
          (static_cast<std::uint64_t>(cfg.node_grid[ni]) << 20) | r;
      ctx.transfer[ni] = build_realization(cfg, stream_id, cfg.a_norm,
                                           cfg.node_grid[ni]);
    }
    ctxs[r] = std::move(ctx);
  });

  struct Variant {
    std::string name;
    PenaltyKind penalty = PenaltyKind::None;
    bool is_gnn = false;
    bool is_gf = false;
    bool is_dmlp = false;
  };
  std::vector<Variant> variants;
  for (PenaltyKind k : cfg.penalties)
    variants.push_back(
        {"gnn_" + penalty_to_string(k), k, true, false, false});
  variants.push_back({"gf", PenaltyKind::None, false, true, false});
  variants.push_back({"dmlp", PenaltyKind::None, false, false, true});

  std::size_t n_nodes_cells = cfg.node_grid.size();
  Exp5Result out;
  out.rows.resize(variants.size() * cfg.n_realizations * n_nodes_cells);
  std::vector<nlohmann::json> models(variants.size());

  parallel_for(variants.size() * cfg.n_realizations, workers,
               [&](std::size_t task) {
    std::size_t vi = task / cfg.n_realizations;
    std::size_t r = task % cfg.n_realizations;
    const Variant& v = variants[vi];
    const Exp5Context& ctx = ctxs[r];
    const Realization& R = ctx.base;
    RngStream root(cfg.seed, r);
    auto interval = default_interval({R.d.support});

    std::unique_ptr<Controller> ctrl;
    double lr = cfg.gnn_lr;
    if (v.is_gnn) {
      RngStream init = root.substream(kInitTag + 11);
      ctrl = make_gnn_controller(
          make_gnn(controller_arch(cfg.gnn_features, cfg.gnn_order), interval,
                   Nonlinearity::Tanh, init));
    } else if (v.is_gf) {
      RngStream init = root.substream(kInitTag + 12);
      ctrl = make_gf_controller(
          controller_arch(cfg.gf_features, cfg.gf_order), interval, init);
      lr = cfg.gf_lr;
    } else {
      RngStream init = root.substream(kInitTag + 13);
      ctrl = make_dmlp_controller(base_n, cfg.dmlp_hidden, init);
      lr = cfg.dmlp_lr;
    }
    TrainConfig tc = base_train_config(cfg, R, lr, v.penalty);
    bool ok = train_cell(*ctrl, R, tc);
    if (ok && r == 0) models[vi] = controller_to_json(*ctrl);

    for (std::size_t ni = 0; ni < n_nodes_cells; ++ni) {
      Exp5Row row;
      row.controller = v.name;
      row.n_nodes = cfg.node_grid[ni];
      row.realization = r;
      row.train_failed = !ok;
      if (ok) {
        // Same-size transfer evaluates on the training system itself; the
        // spatial replication rule only matters when the node set changes.
        const Realization& target = (ni == 0) ? R : ctx.transfer[ni];
        const Controller* eval_ctrl = ctrl.get();
        std::unique_ptr<Controller> replicated;
        if (v.is_dmlp && ni != 0) {
          auto* dmlp = static_cast<DmlpController*>(ctrl.get());
          replicated = dmlp->replicate_to(R.graph.positions,
                                          target.graph.positions);
          eval_ctrl = replicated.get();
        }
        EvalSummary s = evaluate(*eval_ctrl, target.d, target.cost,
                                 target.test_states, cfg.horizon,
                                 &target.opt_costs);
        std::vector<double> stable_costs;
        for (std::size_t i = 0; i < s.costs.size(); ++i)
          if (s.stable[i]) stable_costs.push_back(s.costs[i]);
        row.median_stable = median_or_nan(std::move(stable_costs));
        row.stable_ratio = s.stable_ratio;
      } else {
        row.median_stable = kNaN;
        row.stable_ratio = kNaN;
      }
      out.rows[(vi * cfg.n_realizations + r) * n_nodes_cells + ni] =
          std::move(row);
    }
  });

  auto meta = csv_metadata(cfg);
  std::filesystem::path dir(cfg.out_dir);
  {
    CsvWriter csv(dir / "exp5_rows.csv", meta,
                  {"controller", "n_nodes", "realization", "train_failed",
                   "median_stable_norm_cost", "stable_ratio"});
    for (const Exp5Row& row : out.rows)
      csv.row({row.controller, fmt_size(row.n_nodes), fmt_size(row.realization),
               bool_cell(row.train_failed), format_double(row.median_stable),
               format_double(row.stable_ratio)});
    out.files.push_back((dir / "exp5_rows.csv").string());
  }
  {
    CsvWriter csv(dir / "exp5_summary.csv", meta,
                  {"controller", "n_nodes", "n_ok", "median_of_medians",
                   "stable_ratio_mean"});
    for (std::size_t vi = 0; vi < variants.size(); ++vi)
      for (std::size_t ni = 0; ni < n_nodes_cells; ++ni) {
        std::vector<double> medians;
        double stable_sum = 0.0;
        std::size_t n_ok = 0;
        for (std::size_t r = 0; r < cfg.n_realizations; ++r) {
          const Exp5Row& row =
              out.rows[(vi * cfg.n_realizations + r) * n_nodes_cells + ni];
          if (row.train_failed) continue;
          ++n_ok;
          if (!std::isnan(row.median_stable))
            medians.push_back(row.median_stable);
          stable_sum += row.stable_ratio;
        }
        csv.row({variants[vi].name, fmt_size(cfg.node_grid[ni]),
                 fmt_size(n_ok), format_double(median_or_nan(medians)),
                 format_double(n_ok ? stable_sum / static_cast<double>(n_ok)
                                    : kNaN)});
      }
    out.files.push_back((dir / "exp5_summary.csv").string());
  }
  if (cfg.save_models)
    for (std::size_t vi = 0; vi < variants.size(); ++vi)
      if (!models[vi].is_null()) {
        std::filesystem::path path =
            dir / "models" / ("exp5_" + variants[vi].name + ".json");
        nlohmann::json j = models[vi];
        j["code_version"] = kCodeVersion;
        j["config_hash"] = config_hash_hex(cfg);
        write_json_file(path, j);
        out.files.push_back(path.string());
      }
  return out;
}

VerifyRunResult run_verify(const ExperimentConfig& cfg) {
  using CampaignFn = CampaignResult (*)(const VerifyOptions&);
  static const CampaignFn kCampaigns[] = {
      campaign_filter_bound,        campaign_gnn_bound,
      campaign_response_lipschitz,  campaign_filter_linearity,
      campaign_equivariance,        campaign_filter_perturbation,
      campaign_gnn_perturbation,    campaign_iss,
      campaign_stability_change,    campaign_deviation,
      campaign_limit_check,         campaign_envelope,
      campaign_determinism};
  constexpr std::size_t kCount = sizeof(kCampaigns) / sizeof(kCampaigns[0]);

  VerifyRunResult out;
  out.campaigns.resize(kCount);
  std::vector<std::vector<InstanceRow>> rows(kCount);
  parallel_for(kCount, resolved_workers(cfg), [&](std::size_t i) {
    VerifyOptions opt = cfg.verify_options();
    opt.rows = &rows[i];
    out.campaigns[i] = kCampaigns[i](opt);
  });

  out.passed = true;
  for (const CampaignResult& c : out.campaigns)
    if (!c.passed()) out.passed = false;

  auto meta = csv_metadata(cfg);
  std::filesystem::path dir(cfg.out_dir);
  {
    CsvWriter csv(dir / "verify_campaigns.csv", meta,
                  {"campaign", "instances", "failures", "passed", "detail"});
    for (const CampaignResult& c : out.campaigns)
      csv.row({c.name, fmt_size(c.instances), fmt_size(c.failures),
               bool_cell(c.passed()), c.detail});
    out.files.push_back((dir / "verify_campaigns.csv").string());
  }
  {
    CsvWriter csv(dir / "verify_instances.csv", meta,
                  {"campaign", "instance", "eps", "lhs", "rhs", "holds"});
    for (std::size_t i = 0; i < kCount; ++i)
      for (const InstanceRow& row : rows[i])
        csv.row({row.campaign, fmt_size(row.instance), format_double(row.eps),
                 format_double(row.lhs), format_double(row.rhs),
                 bool_cell(row.holds)});
    out.files.push_back((dir / "verify_instances.csv").string());
  }
  {
    nlohmann::json j;
    j["code_version"] = kCodeVersion;
    j["config_hash"] = config_hash_hex(cfg);
    j["seed"] = cfg.seed;
    j["fault_scale"] = cfg.fault_scale;
    j["passed"] = out.passed;
    nlohmann::json arr = nlohmann::json::array();
    for (const CampaignResult& c : out.campaigns) {
      nlohmann::json e;
      e["name"] = c.name;
      e["instances"] = c.instances;
      e["failures"] = c.failures;
      e["passed"] = c.passed();
      e["detail"] = c.detail;
      arr.push_back(std::move(e));
    }
    j["campaigns"] = std::move(arr);
    write_json_file(dir / "verify_audit.json", j);
    out.files.push_back((dir / "verify_audit.json").string());
  }
  return out;
}

int run_experiment(const ExperimentConfig& cfg) {
  auto report = [](const std::vector<std::string>& files) {
    for (const std::string& f : files) std::printf("wrote %s\n", f.c_str());
  };
  if (cfg.experiment == "exp1") {
    report(run_exp1(cfg).files);
  } else if (cfg.experiment == "exp2") {
    report(run_exp2(cfg).files);
  } else if (cfg.experiment == "exp3") {
    report(run_exp3(cfg).files);
  } else if (cfg.experiment == "exp4") {
    report(run_exp4(cfg).files);
  } else if (cfg.experiment == "exp5") {
    report(run_exp5(cfg).files);
  } else if (cfg.experiment == "verify") {
    VerifyRunResult res = run_verify(cfg);
    for (const CampaignResult& c : res.campaigns)
      std::printf("[%s] %s (instances=%zu failures=%zu) %s\n",
                  c.passed() ? "PASS" : "FAIL", c.name.c_str(), c.instances,
                  c.failures, c.detail.c_str());
    report(res.files);
    if (!res.passed) return 1;
  } else {
    std::fprintf(stderr, "unknown experiment: %s\n", cfg.experiment.c_str());
    return 2;
  }
  return 0;
}

}  // namespace gnnctrl
