#include "lfa/optimize.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lfa/errors.hpp"
#include "lfa/hvp.hpp"

namespace lfa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_set(const std::optional<double>& field, const char* name) {
  if (!field.has_value()) {
    throw std::invalid_argument(std::string(name) + " is required for this optimizer");
  }
}

void require_unset(const std::optional<double>& field, const char* name) {
  if (field.has_value()) {
    throw std::invalid_argument(std::string(name) + " is not valid for this optimizer");
  }
}

EpochRecord second_order_step(LatentState& state, const HdiMatrix& train_data,
                              const TrainConfig& config, bool cubic) {
  const FlatVector g = gradient(state, train_data);
  const double grad_norm = g.values.norm();
  const DampingSpec damping =
      cubic ? DampingSpec::cubic(state.reg_strength, config.cubic_m.value(), grad_norm)
            : DampingSpec::fixed(state.reg_strength, config.fixed_damping.value());

  EpochRecord record;
  record.gradient_norm = grad_norm;
  record.damping_value = damping.eta();

  if (grad_norm > 0.0) {
    FlatVector rhs(g.shape);
    rhs.values = -g.values;
    const auto apply = [&](const FlatVector& v) {
      return regularized_hvp(state, train_data, v, damping);
    };
    CgOutcome outcome = cg_solve(apply, rhs, config.cg);
    if (!outcome.increment.values.allFinite()) {
      throw NumericalError("second-order update is not finite");
    }
    state.add_increment(outcome.increment);
    record.cg_iterations = outcome.iterations_used;
  }
  record.objective_train = objective(state, train_data);
  return record;
}

enum class FirstOrderKind { SgdMomentum, Adam };

EpochRecord first_order_step(LatentState& state, const HdiMatrix& train_data,
                             const TrainConfig& config, FirstOrderBuffers& buffers,
                             FirstOrderKind kind) {
  const std::int32_t f = state.rank();
  const double lr = config.learning_rate.value();
  const double lambda = state.reg_strength;

  const std::int64_t n = train_data.num_entries();
  buffers.order.resize(static_cast<std::size_t>(n));
  std::iota(buffers.order.begin(), buffers.order.end(), std::int64_t{0});
  buffers.rng.shuffle(buffers.order);

  if (kind == FirstOrderKind::SgdMomentum) {
    const double beta = config.momentum.value();
    for (const std::int64_t e : buffers.order) {
      const RatingTriple& t = train_data.entry(e);
      double* yu = state.user_row(t.user);
      double* yi = state.item_row(t.item);
      double* vu = buffers.velocity.user(t.user);
      double* vi = buffers.velocity.item(t.item);
      double pred = 0.0;
      for (std::int32_t d = 0; d < f; ++d) pred += yu[d] * yi[d];
      const double resid = t.rating - pred;
      for (std::int32_t d = 0; d < f; ++d) {
        const double old_u = yu[d];
        const double old_i = yi[d];
        const double gu = -resid * old_i + lambda * old_u;
        const double gi = -resid * old_u + lambda * old_i;
        vu[d] = beta * vu[d] + gu;
        vi[d] = beta * vi[d] + gi;
        yu[d] -= lr * vu[d];
        yi[d] -= lr * vi[d];
      }
    }
  } else {
    const double beta1 = config.adam_beta1.value();
    const double beta2 = config.adam_beta2.value();
    const double eps = config.adam_epsilon.value();
    for (const std::int64_t e : buffers.order) {
      const RatingTriple& t = train_data.entry(e);
      double* yu = state.user_row(t.user);
      double* yi = state.item_row(t.item);
      double* m1u = buffers.moment1.user(t.user);
      double* m1i = buffers.moment1.item(t.item);
      double* m2u = buffers.moment2.user(t.user);
      double* m2i = buffers.moment2.item(t.item);

      ++buffers.step_count;
      buffers.beta1_power *= beta1;
      buffers.beta2_power *= beta2;
      const double bc1 = 1.0 - buffers.beta1_power;
      const double bc2 = 1.0 - buffers.beta2_power;

      double pred = 0.0;
      for (std::int32_t d = 0; d < f; ++d) pred += yu[d] * yi[d];
      const double resid = t.rating - pred;
      for (std::int32_t d = 0; d < f; ++d) {
        const double old_u = yu[d];
        const double old_i = yi[d];
        const double gu = -resid * old_i + lambda * old_u;
        const double gi = -resid * old_u + lambda * old_i;
        m1u[d] = beta1 * m1u[d] + (1.0 - beta1) * gu;
        m1i[d] = beta1 * m1i[d] + (1.0 - beta1) * gi;
        m2u[d] = beta2 * m2u[d] + (1.0 - beta2) * gu * gu;
        m2i[d] = beta2 * m2i[d] + (1.0 - beta2) * gi * gi;
        yu[d] -= lr * (m1u[d] / bc1) / (std::sqrt(m2u[d] / bc2) + eps);
        yi[d] -= lr * (m1i[d] / bc1) / (std::sqrt(m2i[d] / bc2) + eps);
      }
    }
  }

  EpochRecord record;
  record.objective_train = objective(state, train_data);
  return record;
}

}  // namespace

std::string_view optimizer_name(Optimizer o) {
  switch (o) {
    case Optimizer::SgdMomentum: return "sgd_momentum";
    case Optimizer::Adam: return "adam";
    case Optimizer::SlfFixed: return "slf_fixed";
    case Optimizer::Acrslf: return "acrslf";
  }
  return "unknown";
}

std::optional<Optimizer> parse_optimizer(std::string_view name) {
  if (name == "sgd_momentum") return Optimizer::SgdMomentum;
  if (name == "adam") return Optimizer::Adam;
  if (name == "slf_fixed") return Optimizer::SlfFixed;
  if (name == "acrslf") return Optimizer::Acrslf;
  return std::nullopt;
}

void apply_defaults(TrainConfig& config) {
  switch (config.optimizer) {
    case Optimizer::SgdMomentum:
      if (!config.momentum) config.momentum = 0.9;
      break;
    case Optimizer::Adam:
      if (!config.adam_beta1) config.adam_beta1 = 0.9;
      if (!config.adam_beta2) config.adam_beta2 = 0.999;
      if (!config.adam_epsilon) config.adam_epsilon = 1e-8;
      break;
    case Optimizer::SlfFixed:
      break;
    case Optimizer::Acrslf:
      if (!config.cubic_m) config.cubic_m = 1.0;
      break;
  }
}

void validate(const TrainConfig& config) {
  require(config.max_epochs >= 1, "max_epochs must be >= 1");
  require(config.patience >= 1, "patience must be >= 1");
  require(config.min_improvement >= 0.0, "min_improvement must be >= 0");
  require(config.rank >= 1, "rank must be >= 1");
  require(config.reg_strength >= 0.0, "lambda must be >= 0");
  require(config.init_hi > 0.0, "init_hi must be > 0");
  require(config.cg.max_iterations >= 1, "cg max_iterations must be >= 1");
  require(config.cg.rel_tolerance > 0.0, "cg rel_tolerance must be > 0");

  switch (config.optimizer) {
    case Optimizer::SgdMomentum:
      require_set(config.learning_rate, "learning_rate");
      require_set(config.momentum, "momentum");
      require(*config.learning_rate > 0.0, "learning_rate must be > 0");
      require(*config.momentum >= 0.0 && *config.momentum < 1.0, "momentum must lie in [0, 1)");
      require_unset(config.adam_beta1, "adam_beta1");
      require_unset(config.adam_beta2, "adam_beta2");
      require_unset(config.adam_epsilon, "adam_epsilon");
      require_unset(config.fixed_damping, "gamma");
      require_unset(config.cubic_m, "cubic_m");
      break;
    case Optimizer::Adam:
      require_set(config.learning_rate, "learning_rate");
      require_set(config.adam_beta1, "adam_beta1");
      require_set(config.adam_beta2, "adam_beta2");
      require_set(config.adam_epsilon, "adam_epsilon");
      require(*config.learning_rate > 0.0, "learning_rate must be > 0");
      require(*config.adam_beta1 >= 0.0 && *config.adam_beta1 < 1.0,
              "adam_beta1 must lie in [0, 1)");
      require(*config.adam_beta2 >= 0.0 && *config.adam_beta2 < 1.0,
              "adam_beta2 must lie in [0, 1)");
      require(*config.adam_epsilon > 0.0, "adam_epsilon must be > 0");
      require_unset(config.momentum, "momentum");
      require_unset(config.fixed_damping, "gamma");
      require_unset(config.cubic_m, "cubic_m");
      break;
    case Optimizer::SlfFixed:
      require_set(config.fixed_damping, "gamma");
      require(*config.fixed_damping > 0.0, "gamma must be > 0");
      require_unset(config.learning_rate, "learning_rate");
      require_unset(config.momentum, "momentum");
      require_unset(config.adam_beta1, "adam_beta1");
      require_unset(config.adam_beta2, "adam_beta2");
      require_unset(config.adam_epsilon, "adam_epsilon");
      require_unset(config.cubic_m, "cubic_m");
      break;
    case Optimizer::Acrslf:
      require_set(config.cubic_m, "cubic_m");
      require(*config.cubic_m > 0.0, "cubic_m must be > 0");
      require_unset(config.learning_rate, "learning_rate");
      require_unset(config.momentum, "momentum");
      require_unset(config.adam_beta1, "adam_beta1");
      require_unset(config.adam_beta2, "adam_beta2");
      require_unset(config.adam_epsilon, "adam_epsilon");
      require_unset(config.fixed_damping, "gamma");
      break;
  }
}

FirstOrderBuffers::FirstOrderBuffers(FactorShape shape, std::uint64_t seed)
    : velocity(shape), moment1(shape), moment2(shape), rng(seed) {}

EpochRecord step_acrslf(LatentState& state, const HdiMatrix& train_data,
                        const TrainConfig& config) {
  require_set(config.cubic_m, "cubic_m");
  require(*config.cubic_m > 0.0, "cubic_m must be > 0");
  return second_order_step(state, train_data, config, /*cubic=*/true);
}

EpochRecord step_slf(LatentState& state, const HdiMatrix& train_data, const TrainConfig& config) {
  require_set(config.fixed_damping, "gamma");
  require(*config.fixed_damping > 0.0, "gamma must be > 0");
  return second_order_step(state, train_data, config, /*cubic=*/false);
}

EpochRecord step_sgd_momentum(LatentState& state, const HdiMatrix& train_data,
                              const TrainConfig& config, FirstOrderBuffers& buffers) {
  require_set(config.learning_rate, "learning_rate");
  require_set(config.momentum, "momentum");
  return first_order_step(state, train_data, config, buffers, FirstOrderKind::SgdMomentum);
}

EpochRecord step_adam(LatentState& state, const HdiMatrix& train_data, const TrainConfig& config,
                      FirstOrderBuffers& buffers) {
  require_set(config.learning_rate, "learning_rate");
  require_set(config.adam_beta1, "adam_beta1");
  require_set(config.adam_beta2, "adam_beta2");
  require_set(config.adam_epsilon, "adam_epsilon");
  return first_order_step(state, train_data, config, buffers, FirstOrderKind::Adam);
}

TrainResult train(const LatentState& initial, const HdiMatrix& train_data,
                  std::span<const RatingTriple> eval_set, const TrainConfig& config_in) {
  TrainConfig config = config_in;
  apply_defaults(config);
  validate(config);
  if (eval_set.empty()) throw std::invalid_argument("evaluation set must be non-empty");
  if (initial.num_users() != train_data.num_users() ||
      initial.num_items() != train_data.num_items()) {
    throw std::invalid_argument("initial state does not match matrix dimensions");
  }

  const bool first_order =
      config.optimizer == Optimizer::SgdMomentum || config.optimizer == Optimizer::Adam;

  TrainResult result;
  LatentState state = initial;
  state.reg_strength = config.reg_strength;
  result.best_state = state;

  FirstOrderBuffers buffers(state.shape(), config.seed);
  const double initial_objective = first_order ? objective(state, train_data) : 0.0;
  const double divergence_limit = 1e3 * std::max(initial_objective, 1e-12);

  double best_rmse = std::numeric_limits<double>::infinity();
  double stop_reference = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochRecord record;
    try {
      switch (config.optimizer) {
        case Optimizer::SgdMomentum:
          record = step_sgd_momentum(state, train_data, config, buffers);
          break;
        case Optimizer::Adam:
          record = step_adam(state, train_data, config, buffers);
          break;
        case Optimizer::SlfFixed:
          record = step_slf(state, train_data, config);
          break;
        case Optimizer::Acrslf:
          record = step_acrslf(state, train_data, config);
          break;
      }
      record.rmse_eval = rmse(state, eval_set);
    } catch (const NumericalError& err) {
      result.failed = true;
      result.failure_reason = err.what();
      break;
    }
    record.epoch = epoch;
    record.wall_seconds = config.deterministic ? 0.0 : seconds_since(t0);
    result.history.push_back(record);
    result.epochs_run = epoch;

    if (!std::isfinite(record.objective_train) || !std::isfinite(record.rmse_eval)) {
      result.failed = true;
      result.failure_reason = "non-finite training metrics at epoch " + std::to_string(epoch);
      break;
    }
    if (first_order && record.objective_train > divergence_limit) {
      result.failed = true;
      result.failure_reason = "objective exceeded 1000x its initial value at epoch " +
                              std::to_string(epoch);
      break;
    }

    if (record.rmse_eval < best_rmse) {
      best_rmse = record.rmse_eval;
      result.best_state = state;
      result.best_epoch = epoch;
    }
    if (record.rmse_eval < stop_reference - config.min_improvement) {
      stop_reference = record.rmse_eval;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
    }
    if (epochs_without_improvement >= config.patience) break;
  }

  if (result.best_epoch > 0) result.best_rmse = best_rmse;
  for (const EpochRecord& r : result.history) result.total_seconds += r.wall_seconds;
  return result;
}

}  // namespace lfa
