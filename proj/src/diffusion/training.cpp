#include "bidd/diffusion/training.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "bidd/error.hpp"
#include "bidd/dgp/io.hpp"

namespace bidd {

void TrainSpec::validate() const {
  if (T == 0) throw ConfigError("train spec: T must be at least 1");
  if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max) {
    throw ConfigError("train spec: need 0 < beta_min <= beta_max < 1");
  }
  if (!(lr_init > 0.0) || !(lr_final > 0.0) || !(weight_decay >= 0.0)) {
    throw ConfigError("train spec: learning rates must be positive, weight decay non-negative");
  }
  model.validate();
  if (model.t_max != T) {
    throw ConfigError("train spec: model t_max " + std::to_string(model.t_max) +
                      " differs from T " + std::to_string(T));
  }
}

AdamWConfig TrainSpec::optimizer() const {
  AdamWConfig c;
  c.lr_init = lr_init;
  c.lr_final = lr_final;
  c.total_epochs = epochs;
  c.weight_decay = weight_decay;
  return c;
}

NoiseSchedule make_schedule(const TrainSpec& spec) {
  return make_schedule(spec.T, spec.beta_min, spec.beta_max, spec.schedule);
}

TrainResult train_conditional(std::span<const double> a, std::span<const double> b,
                              const TrainSpec& spec, const Rng& rng) {
  spec.validate();
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) throw ParameterError("train_conditional: need n >= 2 paired rows");

  const NoiseSchedule schedule = make_schedule(spec);
  Rng init_rng = rng.split("init");
  TrainResult result{init_params(init_rng, spec.model), {}};
  result.trace.reserve(spec.epochs);
  OptimizerState opt = make_optimizer(result.model, spec.optimizer());

  Rng draw = rng.split("train");
  const std::vector<double> condition =
      spec.conditional ? std::vector<double>(b.begin(), b.end()) : std::vector<double>(n, 0.0);
  std::vector<std::size_t> t(n);
  std::vector<double> eps(n), a_t(n), grad;
  ForwardCache cache;
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = 1 + draw.below(spec.T);
      eps[i] = draw.normal();
      a_t[i] = noised(a[i], eps[i], schedule.alpha_bar[t[i] - 1]);
    }
    forward(result.model, a_t, condition, t, cache);
    const double loss = mse_loss(cache.prediction, eps, &grad);
    const double lr = opt.config.lr_at(epoch);
    if (!std::isfinite(loss)) {
      throw TrainingError("training loss is not finite", epoch, lr);
    }
    result.trace.push_back({epoch, loss, lr});
    adamw_step(result.model, backward(result.model, cache, grad), opt, epoch);
  }
  return result;
}

TrainResult train_conditional(const PairDataset& data, const TrainSpec& spec, const Rng& rng) {
  data.validate();
  return train_conditional(data.a, data.b, spec, rng);
}

NoisePrediction predict_noise(const DenoiserModel& model, std::span<const double> a,
                              std::span<const double> b, std::size_t t,
                              const NoiseSchedule& schedule, Rng& rng, std::size_t k,
                              bool mask_condition, ForwardCache* workspace) {
  if (a.size() != b.size()) throw ParameterError("predict_noise: column lengths differ");
  if (k == 0) throw ParameterError("predict_noise: oversampling factor must be at least 1");
  if (t < 1 || t > schedule.T) {
    throw ParameterError("predict_noise: timestep " + std::to_string(t) + " outside the schedule");
  }
  const std::size_t rows = a.size() * k;
  const double ab = schedule.alpha_bar[t - 1];
  NoisePrediction out;
  out.noise.resize(rows);
  out.condition.resize(rows);
  std::vector<double> a_t(rows);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t row = i * k + r;
      out.noise[row] = rng.normal();
      out.condition[row] = b[i];
      a_t[row] = noised(a[i], out.noise[row], ab);
    }
  }
  const std::vector<std::size_t> ts(rows, t);
  if (mask_condition) {
    const std::vector<double> zeros(rows, 0.0);
    out.predicted = predict(model, a_t, zeros, ts, workspace);
  } else {
    out.predicted = predict(model, a_t, out.condition, ts, workspace);
  }
  return out;
}

void write_loss_trace(std::ostream& out, std::span<const LossRecord> trace) {
  out << "epoch,loss,lr\n";
  for (const auto& r : trace) {
    out << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.lr) << '\n';
  }
}

}  // namespace bidd
