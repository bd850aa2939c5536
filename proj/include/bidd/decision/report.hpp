#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "bidd/decision/profile.hpp"

namespace bidd {

struct VerdictContext {
  std::uint64_t seed = 0;
  std::optional<std::string> policy;
  std::optional<std::string> estimator;
  double runtime_seconds = 0.0;
};

/// {verdict, rule, votes, T, mean_mi_a, mean_mi_b, seed, policy, estimator,
///  runtime_seconds, method, tie, margin}; baselines report their scores as
/// score_a / score_b and null for the profile fields.
nlohmann::json verdict_to_json(const DirectionVerdict& v, const VerdictContext& ctx);

/// CSV with header "t,mi_a,mi_b".
void write_profile_csv(std::ostream& out, const MIProfile& mi_a, const MIProfile& mi_b);

}  // namespace bidd
