#include "gnnctrl/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnnctrl/errors.hpp"
#include "gnnctrl/simulate.hpp"

namespace gnnctrl {

PenaltyKind penalty_from_string(const std::string& name) {
  if (name == "none") return PenaltyKind::None;
  if (name == "size") return PenaltyKind::Size;
  if (name == "lipschitz") return PenaltyKind::Lipschitz;
  if (name == "both") return PenaltyKind::Both;
  throw InvalidArgumentError("unknown penalty: " + name);
}

std::string penalty_to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::Size: return "size";
    case PenaltyKind::Lipschitz: return "lipschitz";
    case PenaltyKind::Both: return "both";
  }
  throw InvalidArgumentError("unknown penalty kind");
}

TrainConfig train_config_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    TrainConfig base) {
  TrainConfig cfg = base;
  for (const auto& [key, value] : pairs) {
    try {
      if (key == "train_size") cfg.train_size = std::stoul(value);
      else if (key == "valid_size") cfg.valid_size = std::stoul(value);
      else if (key == "batch_size") cfg.batch_size = std::stoul(value);
      else if (key == "epochs") cfg.epochs = std::stoul(value);
      else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
      else if (key == "beta1") cfg.beta1 = std::stod(value);
      else if (key == "beta2") cfg.beta2 = std::stod(value);
      else if (key == "adam_eps") cfg.adam_eps = std::stod(value);
      else if (key == "validate_every") cfg.validate_every = std::stoul(value);
      else if (key == "horizon") cfg.horizon = std::stoul(value);
      else if (key == "penalty") cfg.penalty = penalty_from_string(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else throw InvalidArgumentError("unknown train config key: " + key);
    } catch (const std::invalid_argument&) {
      throw InvalidArgumentError("bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
      throw InvalidArgumentError("value out of range for " + key);
    }
  }
  if (cfg.batch_size == 0 || cfg.train_size == 0 || cfg.validate_every == 0)
    throw InvalidArgumentError("train sizes must be positive");
  return cfg;
}

std::vector<Matrix> sample_initial_states(std::size_t count,
                                          std::size_t n_nodes,
                                          std::size_t f_dim, RngStream& rng) {
  std::vector<Matrix> states;
  states.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Matrix x(n_nodes, f_dim);
    for (double& v : x.data()) v = rng.normal();
    states.push_back(std::move(x));
  }
  return states;
}

AdamState make_adam_state(std::size_t n_params) {
  AdamState st;
  st.m.assign(n_params, 0.0);
  st.v.assign(n_params, 0.0);
  return st;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw DimensionError("adam_step size mismatch");
  state.step += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    double m_hat = state.m[i] / bc1;
    double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

namespace {

double mean_cost(const Controller& ctrl, const DistributedSystem& d,
                 const CostSpec& cost, const std::vector<Matrix>& states,
                 std::size_t horizon, const std::vector<double>* normalizers) {
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    TrajectoryRecord rec = rollout(d, ctrl, states[i], horizon, cost);
    if (rec.diverged_at.has_value())
      return std::numeric_limits<double>::infinity();
    double c = rec.total_cost;
    if (normalizers) c /= (*normalizers)[i];
    total += c;
  }
  return total / static_cast<double>(states.size());
}

}  // namespace

TrainResult train(Controller& ctrl, const DistributedSystem& d,
                  const CostSpec& cost, const TrainConfig& cfg) {
  if (!ctrl.trainable())
    throw NotApplicableError(ctrl.kind() + " is not trainable");
  validate_system(d);

  RngStream base(cfg.seed, 0x747261696eULL);  // training-scope stream
  RngStream train_stream = base.substream(1);
  RngStream valid_stream = base.substream(2);
  std::vector<Matrix> train_states = sample_initial_states(
      cfg.train_size, d.n_nodes(), d.f_dim, train_stream);
  std::vector<Matrix> valid_states = sample_initial_states(
      cfg.valid_size, d.n_nodes(), d.f_dim, valid_stream);

  // Per-state optimal costs make the normalized validation curve; raw cost
  // drives the snapshot choice.
  std::vector<double> optimal_costs;
  bool have_normalizer = d.f_dim == 1 && d.g_dim == 1;
  if (have_normalizer) {
    auto optimal = make_optimal_controller(d, cost);
    optimal_costs.reserve(valid_states.size());
    for (const Matrix& x0 : valid_states)
      optimal_costs.push_back(
          rollout(d, *optimal, x0, cfg.horizon, cost).total_cost);
  }

  std::vector<double> params = ctrl.parameters();
  AdamState adam = make_adam_state(params.size());

  TrainResult result;
  result.best_raw_cost = std::numeric_limits<double>::infinity();

  auto validate = [&](std::size_t update) {
    double raw = mean_cost(ctrl, d, cost, valid_states, cfg.horizon, nullptr);
    double normalized = std::numeric_limits<double>::quiet_NaN();
    if (have_normalizer)
      normalized =
          mean_cost(ctrl, d, cost, valid_states, cfg.horizon, &optimal_costs);
    bool best = raw < result.best_raw_cost;
    if (best) {
      result.best_raw_cost = raw;
      result.best_update = update;
      result.best_params = params;
    }
    result.validations.push_back({update, raw, normalized, best});
  };

  validate(0);

  std::vector<std::size_t> perm(cfg.train_size);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;

  std::size_t update = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream shuffle_stream = base.substream(1000 + epoch);
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::size_t j = shuffle_stream.uniform_index(i);
      std::swap(perm[i - 1], perm[j]);
    }
    for (std::size_t start = 0; start < cfg.train_size;
         start += cfg.batch_size) {
      std::size_t batch_end = std::min(start + cfg.batch_size, cfg.train_size);
      std::size_t batch_count = batch_end - start;
      std::vector<double> grad(params.size(), 0.0);
      double loss_sum = 0.0;
      std::size_t skipped = 0;
      for (std::size_t idx = start; idx < batch_end; ++idx) {
        try {
          auto [loss, g] = ctrl.loss_and_gradient(
              d, cost, train_states[perm[idx]], cfg.horizon);
          for (std::size_t c = 0; c < grad.size(); ++c) grad[c] += g[c];
          loss_sum += loss;
        } catch (const DivergenceError&) {
          ++skipped;  // zero-gradient contribution
        }
      }
      result.diverged_trajectories += skipped;
      if (2 * skipped > batch_count)
        throw TrainingFailureError(
            "more than half the batch diverged at update " +
            std::to_string(update + 1));
      double scale = 1.0 / static_cast<double>(batch_count);
      for (double& g : grad) g *= scale;
      double display_loss = loss_sum * scale;
      if (cfg.penalty != PenaltyKind::None) {
        auto [pval, pgrad] = ctrl.penalty_gradient(cfg.penalty);
        for (std::size_t c = 0; c < grad.size(); ++c) grad[c] += pgrad[c];
        display_loss += pval;
      }
      adam_step(params, grad, adam, cfg.learning_rate, cfg.beta1, cfg.beta2,
                cfg.adam_eps);
      ctrl.set_parameters(params);
      ++update;
      result.batches.push_back({update, epoch, display_loss, skipped});
      if (update % cfg.validate_every == 0) validate(update);
    }
  }
  if (update % cfg.validate_every != 0) validate(update);

  ctrl.set_parameters(result.best_params);
  return result;
}

EvalSummary evaluate(const Controller& ctrl, const DistributedSystem& d,
                     const CostSpec& cost, const std::vector<Matrix>& states,
                     std::size_t horizon,
                     const std::vector<double>* normalizers) {
  if (states.empty())
    throw InvalidArgumentError("evaluate needs at least one state");
  if (normalizers && normalizers->size() != states.size())
    throw DimensionError("normalizer count must match state count");
  EvalSummary out;
  out.costs.reserve(states.size());
  out.stable.reserve(states.size());
  std::size_t n_stable = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    TrajectoryRecord rec = rollout(d, ctrl, states[i], horizon, cost);
    double c = rec.diverged_at.has_value()
                   ? std::numeric_limits<double>::infinity()
                   : rec.total_cost;
    if (normalizers) c /= (*normalizers)[i];
    out.costs.push_back(c);
    out.stable.push_back(rec.stable);
    if (rec.stable) ++n_stable;
  }
  out.mean = 0.0;
  for (double c : out.costs) out.mean += c;
  out.mean /= static_cast<double>(out.costs.size());
  out.median = median_of(out.costs);
  out.stddev = stddev_of(out.costs);
  out.stable_ratio =
      static_cast<double>(n_stable) / static_cast<double>(states.size());
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw InvalidArgumentError("median of empty list");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Sample standard deviation; a single value has no spread.
double stddev_of(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgumentError("stddev of empty list");
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace gnnctrl
