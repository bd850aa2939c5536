#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bidd/denoiser/adamw.hpp"
#include "bidd/denoiser/model.hpp"
#include "bidd/diffusion/schedule.hpp"
#include "bidd/dgp/pair_dataset.hpp"
#include "bidd/numerics/rng.hpp"

namespace bidd {

struct TrainSpec {
  std::size_t epochs = 4000;
  std::size_t T = 256;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  ScheduleKind schedule = ScheduleKind::Linear;
  double lr_init = 1e-4;
  double lr_final = 1e-5;
  double weight_decay = 0.01;
  DenoiserConfig model = DenoiserConfig::paper();
  /// false trains eps(a_t, t) by feeding a zero condition.
  bool conditional = true;

  /// Throws ConfigError on T = 0, a bad beta range, or a model whose t_max differs from T.
  void validate() const;
  AdamWConfig optimizer() const;
};

NoiseSchedule make_schedule(const TrainSpec& spec);

struct LossRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  DenoiserModel model;
  std::vector<LossRecord> trace;
};

/// Fits eps(a_t, b, t) to denoise column a given column b with one
/// full-batch AdamW step per epoch. Per epoch and row, draws t ~ U{1..T}
/// and eps ~ N(0, 1). Initialization uses rng.split("init") and the epoch
/// draws use rng.split("train"), so two calls with equal rng seeds share
/// their random numbers. Throws TrainingError (epoch, lr) on a non-finite loss.
TrainResult train_conditional(std::span<const double> a, std::span<const double> b,
                              const TrainSpec& spec, const Rng& rng);

/// Same, on a PairDataset read as (a | b).
TrainResult train_conditional(const PairDataset& data, const TrainSpec& spec, const Rng& rng);

/// Predicted and true noise for one timestep. Row i*k + r is repeat r of sample i.
struct NoisePrediction {
  std::vector<double> predicted;
  std::vector<double> condition;
  std::vector<double> noise;
};

/// Draws k fresh noises per row, noises a at timestep t and evaluates the
/// model. The returned condition column always holds b; mask_condition feeds
/// zeros to the network instead (unconditional models).
NoisePrediction predict_noise(const DenoiserModel& model, std::span<const double> a,
                              std::span<const double> b, std::size_t t,
                              const NoiseSchedule& schedule, Rng& rng, std::size_t k,
                              bool mask_condition = false, ForwardCache* workspace = nullptr);

/// CSV with header "epoch,loss,lr".
void write_loss_trace(std::ostream& out, std::span<const LossRecord> trace);

}  // namespace bidd
