#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bidd/dgp/generator.hpp"

namespace bidd {

/// Two-column CSV with header "a,b", values printed with 17 significant digits
/// so that parsing restores every double exactly.
void write_pair_csv(const PairDataset& data, std::ostream& out);
void write_pair_csv(const PairDataset& data, const std::string& path);
/// Reads the format written by write_pair_csv.
PairDataset read_pair_csv(std::istream& in);

/// Shortest-exact decimal rendering of a double (17 significant digits).
std::string format_double(double v);

nlohmann::json to_json(const MechanismSpec& m);
MechanismSpec mechanism_from_json(const nlohmann::json& j);

/// DGPSpec document. Either an explicit "mechanisms" array or a "mechanism"
/// kind (plus optional "hidden") whose parameters are drawn from "seed".
nlohmann::json to_json(const DGPSpec& spec);
DGPSpec dgp_spec_from_json(const nlohmann::json& j);

}  // namespace bidd
