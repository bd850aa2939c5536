#include "bidd/decision/report.hpp"

#include <ostream>

#include "bidd/dgp/io.hpp"
#include "bidd/error.hpp"

namespace bidd {

nlohmann::json verdict_to_json(const DirectionVerdict& v, const VerdictContext& ctx) {
  nlohmann::json j;
  j["verdict"] = std::string(to_string(v.verdict));
  j["method"] = v.method;
  const bool profiled = v.T > 0;
  if (profiled) {
    j["rule"] = std::string(to_string(v.rule));
    j["votes"] = v.votes;
    j["T"] = v.T;
    j["mean_mi_a"] = v.score_a;
    j["mean_mi_b"] = v.score_b;
  } else {
    j["rule"] = nullptr;
    j["votes"] = nullptr;
    j["T"] = nullptr;
    j["mean_mi_a"] = nullptr;
    j["mean_mi_b"] = nullptr;
    j["score_a"] = v.score_a;
    j["score_b"] = v.score_b;
  }
  j["seed"] = ctx.seed;
  j["policy"] = ctx.policy ? nlohmann::json(*ctx.policy) : nlohmann::json(nullptr);
  j["estimator"] = ctx.estimator ? nlohmann::json(*ctx.estimator) : nlohmann::json(nullptr);
  j["runtime_seconds"] = ctx.runtime_seconds;
  j["tie"] = v.tie;
  j["margin"] = v.margin;
  return j;
}

void write_profile_csv(std::ostream& out, const MIProfile& mi_a, const MIProfile& mi_b) {
  if (mi_a.values.size() != mi_b.values.size()) {
    throw ParameterError("profiles must have equal length");
  }
  out << "t,mi_a,mi_b\n";
  for (std::size_t t = 0; t < mi_a.values.size(); ++t) {
    out << t + 1 << ',' << format_double(mi_a.values[t]) << ',' << format_double(mi_b.values[t])
        << '\n';
  }
}

}  // namespace bidd
