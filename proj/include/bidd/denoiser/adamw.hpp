#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bidd/denoiser/model.hpp"

namespace bidd {

struct AdamWConfig {
  double lr_init = 1e-4;
  double lr_final = 1e-5;
  std::size_t total_epochs = 4000;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Cosine annealing: lr_final + (lr_init - lr_final) (1 + cos(pi e / E)) / 2.
  double lr_at(std::size_t epoch) const;
};

struct OptimizerState {
  AdamWConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

OptimizerState make_optimizer(const DenoiserModel& model, const AdamWConfig& config);

/// One decoupled-weight-decay Adam update using lr_at(epoch). Throws
/// TrainingError (carrying the epoch) when a gradient is not finite; the
/// model is left untouched in that case.
void adamw_step(DenoiserModel& model, std::span<const double> grads, OptimizerState& state,
                std::size_t epoch);

}  // namespace bidd
