#include "bidd/diffusion/schedule.hpp"

#include <string>

#include "bidd/error.hpp"

namespace bidd {

NoiseSchedule make_schedule(std::size_t T, double beta_min, double beta_max, ScheduleKind kind) {
  if (T == 0) throw ParameterError("noise schedule: T must be at least 1");
  if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max) {
    throw ParameterError("noise schedule: need 0 < beta_min <= beta_max < 1");
  }
  (void)kind;
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(T);
  s.alpha.resize(T);
  s.alpha_bar.resize(T);
  double prod = 1.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
    s.beta[i] = i + 1 == T && T > 1 ? beta_max : beta_min + frac * (beta_max - beta_min);
    s.alpha[i] = 1.0 - s.beta[i];
    prod *= s.alpha[i];
    s.alpha_bar[i] = prod;
  }
  return s;
}

double noised(double a, double eps, std::size_t t, const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.T) {
    throw ParameterError("noised: timestep " + std::to_string(t) + " outside the schedule");
  }
  return noised(a, eps, schedule.alpha_bar[t - 1]);
}

}  // namespace bidd
