#pragma once

#include <string_view>

#include <json.hpp>

#include "bidd/decision/bidd.hpp"

namespace bidd {

/// paper: full network, 4000 epochs. desk: width 128, one residual block, 1500 epochs.
enum class Preset { Paper, Desk };

std::string_view to_string(Preset p);
Preset parse_preset(std::string_view text);

TrainSpec preset_train_spec(Preset p);
BiddOptions preset_options(Preset p);

/// Every setting that influences a BiDD verdict.
nlohmann::json to_json(const BiddOptions& o);

}  // namespace bidd
