#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bidd/denoiser/model.hpp"
#include "bidd/dependence/estimator.hpp"
#include "bidd/dgp/pair_dataset.hpp"
#include "bidd/diffusion/schedule.hpp"
#include "bidd/numerics/rng.hpp"

namespace bidd {

enum class Rule { Voting, Mean };

std::string_view to_string(Rule r);
Rule parse_rule(std::string_view text);

/// Dependence between the predicted noise of one column and the other
/// (conditioning) column, for t = 1..T. values[t-1] belongs to timestep t.
struct MIProfile {
  std::string denoised;  // "a" or "b"
  std::string estimator;
  std::vector<double> values;

  double mean() const;
};

struct DirectionVerdict {
  Direction verdict = Direction::AtoB;
  std::string method = "bidd";
  Rule rule = Rule::Voting;
  std::size_t votes = 0;  // #{t : mi_a[t] < mi_b[t]}
  std::size_t T = 0;
  double score_a = 0.0;   // mean of mi_a for bidd; method-specific otherwise
  double score_b = 0.0;
  bool tie = false;
  double margin = 0.0;    // votes / T for voting, mean(mi_b) - mean(mi_a) for mean
  MIProfile profile_a;
  MIProfile profile_b;
};

/// Voting: B -> A iff votes > T/2. Mean: B -> A iff mean(mi_a) < mean(mi_b).
/// Everything else is A -> B. tie is set when neither profile holds a strict
/// majority of timesteps (voting) or the means are equal (mean).
/// Throws ParameterError on empty or unequal-length profiles.
DirectionVerdict compare_profiles(const MIProfile& mi_a, const MIProfile& mi_b, Rule rule);

/// Profiles of one trained model under several estimators at once: for every
/// t the predictions are computed once and each estimator is applied to
/// (predicted noise, condition). Timestep t draws its noise from
/// rng.split(t), so the result does not depend on evaluation order.
/// `target` is the denoised column, `condition` the other one.
std::vector<MIProfile> mi_profiles(const DenoiserModel& model, std::span<const double> target,
                                   std::span<const double> condition,
                                   const NoiseSchedule& schedule,
                                   std::span<const Estimator> estimators, std::size_t oversample,
                                   const Rng& rng, bool mask_condition = false);

MIProfile mi_profile(const DenoiserModel& model, std::span<const double> target,
                     std::span<const double> condition, const NoiseSchedule& schedule,
                     const Estimator& estimator, std::size_t oversample, const Rng& rng,
                     bool mask_condition = false);

}  // namespace bidd
