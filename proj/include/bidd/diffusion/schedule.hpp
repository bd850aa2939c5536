#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace bidd {

enum class ScheduleKind { Linear };

struct NoiseSchedule {
  std::size_t T = 0;
  std::vector<double> beta;       // index t-1 holds beta_t
  std::vector<double> alpha;      // 1 - beta_t
  std::vector<double> alpha_bar;  // prod_{s<=t} alpha_s

  double beta_at(std::size_t t) const { return beta.at(t - 1); }
  double alpha_bar_at(std::size_t t) const { return alpha_bar.at(t - 1); }
};

/// beta_t = beta_min + (t-1)/(T-1) (beta_max - beta_min) for t = 1..T.
/// With T = 1 the single step uses beta_min. Throws ParameterError unless
/// T >= 1 and 0 < beta_min <= beta_max < 1.
NoiseSchedule make_schedule(std::size_t T, double beta_min, double beta_max,
                            ScheduleKind kind = ScheduleKind::Linear);

/// sqrt(alpha_bar) a + sqrt(1 - alpha_bar) eps
inline double noised(double a, double eps, double alpha_bar) {
  return std::sqrt(alpha_bar) * a + std::sqrt(1.0 - alpha_bar) * eps;
}

/// Throws ParameterError when t is outside [1, T].
double noised(double a, double eps, std::size_t t, const NoiseSchedule& schedule);

}  // namespace bidd
