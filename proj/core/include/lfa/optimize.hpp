#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfa/cg.hpp"
#include "lfa/dataset.hpp"
#include "lfa/model.hpp"
#include "lfa/rng.hpp"

namespace lfa {

enum class Optimizer { SgdMomentum, Adam, SlfFixed, Acrslf };

std::string_view optimizer_name(Optimizer o);
std::optional<Optimizer> parse_optimizer(std::string_view name);

struct TrainConfig {
  Optimizer optimizer = Optimizer::Acrslf;
  int max_epochs = 500;
  int patience = 10;
  double min_improvement = 1e-5;  // RMSE delta that counts as progress
  std::int32_t rank = 20;         // f
  double reg_strength = 0.02;     // lambda
  double init_hi = 0.004;
  std::uint64_t seed = 0;
  bool deterministic = false;  // zero wall-clock fields in records
  CgConfig cg;                 // second-order only

  // Optimizer-specific fields; exactly the ones relevant to the selected
  // optimizer may be set.
  std::optional<double> learning_rate;  // first-order
  std::optional<double> momentum;       // sgd_momentum beta
  std::optional<double> adam_beta1;
  std::optional<double> adam_beta2;
  std::optional<double> adam_epsilon;
  std::optional<double> fixed_damping;  // slf_fixed gamma
  std::optional<double> cubic_m;        // acrslf M
};

// Fills unset optimizer-specific fields that have standard defaults
// (momentum 0.9; Adam 0.9/0.999/1e-8; M 1.0). learning_rate and
// fixed_damping have no default and stay unset.
void apply_defaults(TrainConfig& config);

// Throws std::invalid_argument when a required field is missing, a field
// irrelevant to the selected optimizer is set, or a value is out of range.
void validate(const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double rmse_eval = 0.0;
  double objective_train = 0.0;
  double wall_seconds = 0.0;
  int cg_iterations = 0;      // second-order only, else 0
  double gradient_norm = 0.0; // second-order only, else 0
  double damping_value = 0.0; // eta used, second-order only
};

// Momentum / Adam accumulators; owned by the train loop and carried across
// epochs.
struct FirstOrderBuffers {
  FirstOrderBuffers(FactorShape shape, std::uint64_t seed);

  FlatVector velocity;          // SGD-M
  FlatVector moment1, moment2;  // Adam
  double beta1_power = 1.0;     // running beta1^t
  double beta2_power = 1.0;
  std::uint64_t step_count = 0;
  SeededRng rng;
  std::vector<std::int64_t> order;  // reused shuffle buffer
};

// One full-batch damped Gauss-Newton epoch with eta = M * ||g||; applies
// y <- y + delta unconditionally.
EpochRecord step_acrslf(LatentState& state, const HdiMatrix& train_data,
                        const TrainConfig& config);

// Same step with fixed eta = gamma.
EpochRecord step_slf(LatentState& state, const HdiMatrix& train_data,
                     const TrainConfig& config);

// One pass over the training entries in a seeded shuffled order, updating
// only the touched factor rows from each entry's instantaneous gradient
// (per-entry regularization, no |K| multiplier).
EpochRecord step_sgd_momentum(LatentState& state, const HdiMatrix& train_data,
                              const TrainConfig& config, FirstOrderBuffers& buffers);

// Same pass structure with per-slot Adam moments and bias correction.
EpochRecord step_adam(LatentState& state, const HdiMatrix& train_data,
                      const TrainConfig& config, FirstOrderBuffers& buffers);

struct TrainResult {
  LatentState best_state;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 1-based; 0 when no epoch completed
  double best_rmse = std::numeric_limits<double>::quiet_NaN();
  int epochs_run = 0;
  double total_seconds = 0.0;  // sum of per-epoch wall_seconds
  bool failed = false;
  std::string failure_reason;
};

// Runs the selected step up to max_epochs with early stopping: the run ends
// once the evaluation RMSE has not improved by more than min_improvement for
// `patience` consecutive epochs. Returns the state with the minimum recorded
// RMSE along with the full history. Step failures flag the result instead of
// propagating.
TrainResult train(const LatentState& initial, const HdiMatrix& train_data,
                  std::span<const RatingTriple> eval_set, const TrainConfig& config);

}  // namespace lfa
