#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"
#include "gnnctrl/system.hpp"

namespace gnnctrl {

struct TrainConfig {
  std::size_t train_size = 100;
  std::size_t valid_size = 20;
  std::size_t batch_size = 20;
  std::size_t epochs = 10;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t validate_every = 5;  // in updates
  std::size_t horizon = 30;
  PenaltyKind penalty = PenaltyKind::None;
  std::uint64_t seed = 0;
};

PenaltyKind penalty_from_string(const std::string& name);
std::string penalty_to_string(PenaltyKind kind);

// Fills a TrainConfig from "key=value" lines ('#' starts a comment).
// Unknown keys raise InvalidArgumentError; missing keys keep defaults.
TrainConfig train_config_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    TrainConfig base = {});

// Independent standard-normal initial states, one n_nodes x f_dim matrix each.
std::vector<Matrix> sample_initial_states(std::size_t count,
                                          std::size_t n_nodes,
                                          std::size_t f_dim, RngStream& rng);

// First/second moment accumulators, congruent with the flat parameters.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

AdamState make_adam_state(std::size_t n_params);

// One bias-corrected moment update; modifies params in place.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

struct BatchLogEntry {
  std::size_t update = 0;  // 1-based update counter after this step
  std::size_t epoch = 0;
  double loss = 0.0;       // mean batch loss plus penalty value
  std::size_t skipped = 0; // diverged trajectories replaced by zero gradient
};

struct ValidationLogEntry {
  std::size_t update = 0;
  double raw_mean_cost = 0.0;
  double normalized_mean_cost = 0.0;  // NaN when no normalizer is available
  bool is_best = false;
};

struct TrainResult {
  std::vector<double> best_params;
  double best_raw_cost = 0.0;
  std::size_t best_update = 0;
  std::vector<BatchLogEntry> batches;
  std::vector<ValidationLogEntry> validations;
  std::size_t diverged_trajectories = 0;
};

// Minibatch ADAM on the controller's flat parameters. The batch gradient is
// the mean of per-trajectory closed-loop gradients (diverged trajectories
// contribute zero and are logged; more than half a batch diverging aborts
// with TrainingFailureError), plus the penalty subgradient when configured.
// Validation runs before the first update, every validate_every updates and
// after the last one; the parameters with the lowest raw mean validation
// cost are retained (first wins ties) and are installed on the controller
// when training returns. Normalized validation cost divides per-state cost
// by the optimal controller's cost on the same state (scalar features only).
TrainResult train(Controller& ctrl, const DistributedSystem& d,
                  const CostSpec& cost, const TrainConfig& cfg);

struct EvalSummary {
  std::vector<double> costs;   // per state; +inf for diverged rollouts
  std::vector<bool> stable;    // per state
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  double stable_ratio = 0.0;
};

// Per-state closed-loop costs. With normalizers (same length as states,
// e.g. the optimal controller's costs) each cost is divided entry-wise.
EvalSummary evaluate(const Controller& ctrl, const DistributedSystem& d,
                     const CostSpec& cost, const std::vector<Matrix>& states,
                     std::size_t horizon,
                     const std::vector<double>* normalizers = nullptr);

double median_of(std::vector<double> values);
double stddev_of(const std::vector<double>& values);

}  // namespace gnnctrl
