#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "bidd/decision/profile.hpp"
#include "bidd/diffusion/training.hpp"

namespace bidd {

/// Test: train on 80%, estimate dependence on the remaining 20%.
/// Total: train on 80%, estimate dependence on all rows.
enum class SplitKind { Test, Total };

std::string_view to_string(SplitKind k);
SplitKind parse_split(std::string_view text);

struct SplitPolicy {
  SplitKind kind = SplitKind::Total;
  double train_fraction = 0.8;
};

constexpr std::size_t kMinDecideRows = 50;

struct BiddOptions {
  SplitPolicy policy;
  TrainSpec train;
  std::vector<Estimator> estimators{Estimator::make_hsic()};
  Rule rule = Rule::Voting;
  std::size_t oversample = 10;

  void validate() const;
};

struct BiddOutcome {
  std::uint64_t seed = 0;
  SplitPolicy policy;
  std::vector<MIProfile> profiles_a;  // one per estimator: a denoised given b
  std::vector<MIProfile> profiles_b;
  std::vector<LossRecord> trace_a;
  std::vector<LossRecord> trace_b;
  double runtime_seconds = 0.0;

  DirectionVerdict verdict(std::size_t estimator, Rule rule) const;
};

/// Trains eps(a | b) and eps(b | a) and builds their profiles. Both directions
/// use the same split, initialization, training draws and evaluation noise
/// (all derived from seed), so swapping the columns swaps the profiles
/// exactly. Unstandardized input is standardized on a copy. Throws
/// ParameterError when n < 50.
BiddOutcome bidd_run(const PairDataset& data, const BiddOptions& options, std::uint64_t seed);

/// bidd_run followed by compare_profiles with the first estimator and options.rule.
DirectionVerdict bidd_decide(const PairDataset& data, const BiddOptions& options,
                             std::uint64_t seed);

/// Row indices of the training part and of the evaluation part.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};
Split make_split(std::size_t n, const SplitPolicy& policy, const Rng& rng);

}  // namespace bidd
