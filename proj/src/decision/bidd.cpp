#include "bidd/decision/bidd.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "../common/text.hpp"
#include "bidd/error.hpp"

namespace bidd {

std::string_view to_string(SplitKind k) { return k == SplitKind::Test ? "test" : "total"; }

SplitKind parse_split(std::string_view text) {
  const auto s = detail::lower(detail::trim(text));
  if (s == "test") return SplitKind::Test;
  if (s == "total") return SplitKind::Total;
  throw ConfigError("unknown split policy: " + std::string(text));
}

void BiddOptions::validate() const {
  train.validate();
  if (!(policy.train_fraction > 0.0 && policy.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  if (estimators.empty()) throw ConfigError("at least one estimator is required");
  for (const auto& e : estimators) e.validate();
  if (oversample == 0) throw ConfigError("oversampling factor must be positive");
}

Split make_split(std::size_t n, const SplitPolicy& policy, const Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng r = rng;
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[r.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::floor(policy.train_fraction * static_cast<double>(n)));
  if (n_train < 2 || n_train >= n) throw ParameterError("split leaves an empty part");
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  if (policy.kind == SplitKind::Test) {
    s.eval.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  } else {
    s.eval.resize(n);
    std::iota(s.eval.begin(), s.eval.end(), std::size_t{0});
  }
  return s;
}

DirectionVerdict BiddOutcome::verdict(std::size_t estimator, Rule rule) const {
  if (estimator >= profiles_a.size()) throw ParameterError("estimator index out of range");
  return compare_profiles(profiles_a[estimator], profiles_b[estimator], rule);
}

BiddOutcome bidd_run(const PairDataset& input, const BiddOptions& options, std::uint64_t seed) {
  input.validate();
  options.validate();
  if (input.size() < kMinDecideRows) {
    throw ParameterError("bidd needs at least " + std::to_string(kMinDecideRows) + " rows, got " +
                         std::to_string(input.size()));
  }
  const auto start = std::chrono::steady_clock::now();

  PairDataset data = input;
  standardize(data);

  const Rng root(seed);
  const Split split = make_split(data.size(), options.policy, root.split("split"));
  const PairDataset train = subset(data, split.train);
  const PairDataset eval = subset(data, split.eval);

  const Rng model_rng = root.split("model");
  const Rng eval_rng = root.split("eval");
  const auto schedule = make_schedule(options.train);
  const bool mask = !options.train.conditional;

  BiddOutcome out;
  out.seed = seed;
  out.policy = options.policy;

  {
    auto fit = train_conditional(train.a, train.b, options.train, model_rng);
    out.profiles_a = mi_profiles(fit.model, eval.a, eval.b, schedule, options.estimators,
                                 options.oversample, eval_rng, mask);
    out.trace_a = std::move(fit.trace);
  }
  {
    auto fit = train_conditional(train.b, train.a, options.train, model_rng);
    out.profiles_b = mi_profiles(fit.model, eval.b, eval.a, schedule, options.estimators,
                                 options.oversample, eval_rng, mask);
    out.trace_b = std::move(fit.trace);
  }

  for (auto& p : out.profiles_a) p.denoised = "a";
  for (auto& p : out.profiles_b) p.denoised = "b";
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

DirectionVerdict bidd_decide(const PairDataset& data, const BiddOptions& options,
                             std::uint64_t seed) {
  return bidd_run(data, options, seed).verdict(0, options.rule);
}

}  // namespace bidd
