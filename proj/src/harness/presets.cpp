#include "bidd/harness/presets.hpp"

#include "../common/text.hpp"
#include "bidd/error.hpp"

namespace bidd {

std::string_view to_string(Preset p) { return p == Preset::Paper ? "paper" : "desk"; }

Preset parse_preset(std::string_view text) {
  const auto s = detail::lower(detail::trim(text));
  if (s == "paper") return Preset::Paper;
  if (s == "desk") return Preset::Desk;
  throw ConfigError("unknown preset: " + std::string(text));
}

TrainSpec preset_train_spec(Preset p) {
  TrainSpec s;
  if (p == Preset::Desk) {
    s.model = DenoiserConfig::desk();
    s.epochs = 1500;
  }
  return s;
}

BiddOptions preset_options(Preset p) {
  BiddOptions o;
  o.train = preset_train_spec(p);
  o.oversample = 10;
  return o;
}

nlohmann::json to_json(const BiddOptions& o) {
  const auto& t = o.train;
  const auto& m = t.model;
  nlohmann::json j;
  j["policy"] = std::string(to_string(o.policy.kind));
  j["train_fraction"] = o.policy.train_fraction;
  j["estimators"] = nlohmann::json::array();
  for (const auto& e : o.estimators) j["estimators"].push_back(e.name());
  j["rule"] = std::string(to_string(o.rule));
  j["oversample"] = o.oversample;
  j["epochs"] = t.epochs;
  j["T"] = t.T;
  j["beta_min"] = t.beta_min;
  j["beta_max"] = t.beta_max;
  j["lr_init"] = t.lr_init;
  j["lr_final"] = t.lr_final;
  j["weight_decay"] = t.weight_decay;
  j["conditional"] = t.conditional;
  j["width"] = m.width;
  j["cond_widths"] = m.cond_widths;
  j["time_embed_dim"] = m.time_embed_dim;
  j["res_blocks"] = m.n_res_blocks;
  j["res_expand"] = m.res_expand;
  return j;
}

}  // namespace bidd
