#include "bidd/denoiser/adamw.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bidd/error.hpp"

namespace bidd {

double AdamWConfig::lr_at(std::size_t epoch) const {
  if (total_epochs == 0) return lr_init;
  const double progress = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return lr_final + 0.5 * (lr_init - lr_final) * (1.0 + std::cos(std::numbers::pi * progress));
}

OptimizerState make_optimizer(const DenoiserModel& model, const AdamWConfig& config) {
  OptimizerState s;
  s.config = config;
  s.m.assign(model.parameter_count(), 0.0);
  s.v.assign(model.parameter_count(), 0.0);
  return s;
}

void adamw_step(DenoiserModel& model, std::span<const double> grads, OptimizerState& state,
                std::size_t epoch) {
  auto params = model.parameters();
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw ParameterError("adamw_step: gradient/state size does not match the model");
  }
  const AdamWConfig& c = state.config;
  const double lr = c.lr_at(epoch);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError("non-finite gradient at epoch " + std::to_string(epoch) +
                              " (lr " + std::to_string(lr) + ")",
                          epoch, lr);
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - lr * c.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] = params[i] * decay - lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace bidd
