#include "bidd/decision/profile.hpp"

#include <omp.h>

#include <numeric>

#include "../common/text.hpp"
#include "bidd/diffusion/training.hpp"
#include "bidd/error.hpp"

namespace bidd {

std::string_view to_string(Rule r) { return r == Rule::Voting ? "voting" : "mean"; }

Rule parse_rule(std::string_view text) {
  const auto s = detail::lower(detail::trim(text));
  if (s == "voting" || s == "vote") return Rule::Voting;
  if (s == "mean") return Rule::Mean;
  throw ConfigError("unknown decision rule: " + std::string(text));
}

double MIProfile::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

DirectionVerdict compare_profiles(const MIProfile& mi_a, const MIProfile& mi_b, Rule rule) {
  if (mi_a.values.empty() || mi_a.values.size() != mi_b.values.size()) {
    throw ParameterError("profiles must be non-empty and of equal length");
  }
  DirectionVerdict v;
  v.rule = rule;
  v.T = mi_a.values.size();
  std::size_t reverse_votes = 0;
  for (std::size_t t = 0; t < v.T; ++t) {
    v.votes += mi_a.values[t] < mi_b.values[t];
    reverse_votes += mi_b.values[t] < mi_a.values[t];
  }
  v.score_a = mi_a.mean();
  v.score_b = mi_b.mean();
  if (rule == Rule::Voting) {
    v.verdict = 2 * v.votes > v.T ? Direction::BtoA : Direction::AtoB;
    v.tie = 2 * v.votes <= v.T && 2 * reverse_votes <= v.T;
    v.margin = static_cast<double>(v.votes) / static_cast<double>(v.T);
  } else {
    v.verdict = v.score_a < v.score_b ? Direction::BtoA : Direction::AtoB;
    v.tie = v.score_a == v.score_b;
    v.margin = v.score_b - v.score_a;
  }
  v.profile_a = mi_a;
  v.profile_b = mi_b;
  return v;
}

std::vector<MIProfile> mi_profiles(const DenoiserModel& model, std::span<const double> target,
                                   std::span<const double> condition,
                                   const NoiseSchedule& schedule,
                                   std::span<const Estimator> estimators, std::size_t oversample,
                                   const Rng& rng, bool mask_condition) {
  if (target.size() != condition.size() || target.size() < 4) {
    throw ParameterError("profile needs two equal columns with at least 4 rows");
  }
  if (estimators.empty()) throw ParameterError("no dependence estimator given");
  if (oversample == 0) throw ParameterError("oversampling factor must be positive");
  for (const auto& e : estimators) e.validate();

  const std::size_t T = schedule.T;
  std::vector<MIProfile> out(estimators.size());
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    out[e].estimator = estimators[e].name();
    out[e].values.assign(T, 0.0);
  }

#pragma omp parallel
  {
    ForwardCache workspace;
#pragma omp for schedule(dynamic)
    for (std::size_t t = 1; t <= T; ++t) {
      Rng r = rng.split(static_cast<std::uint64_t>(t));
      const auto pred = predict_noise(model, target, condition, t, schedule, r, oversample,
                                      mask_condition, &workspace);
      for (std::size_t e = 0; e < estimators.size(); ++e) {
        out[e].values[t - 1] = estimators[e](pred.predicted, pred.condition);
      }
    }
  }
  return out;
}

MIProfile mi_profile(const DenoiserModel& model, std::span<const double> target,
                     std::span<const double> condition, const NoiseSchedule& schedule,
                     const Estimator& estimator, std::size_t oversample, const Rng& rng,
                     bool mask_condition) {
  return mi_profiles(model, target, condition, schedule, std::span<const Estimator>(&estimator, 1),
                     oversample, rng, mask_condition)
      .front();
}

}  // namespace bidd
