#include "bidd/dgp/pair_dataset.hpp"

#include <string>

#include "../common/text.hpp"
#include "bidd/error.hpp"
#include "bidd/numerics/sampling.hpp"

namespace bidd {

std::string_view to_string(Direction d) { return d == Direction::AtoB ? "AtoB" : "BtoA"; }

Direction parse_direction(std::string_view text) {
  const std::string s = detail::lower(detail::trim(text));
  if (s == "atob" || s == "a->b" || s == "->" || s == "x->y") return Direction::AtoB;
  if (s == "btoa" || s == "b->a" || s == "<-" || s == "y->x") return Direction::BtoA;
  throw ParameterError("unknown direction '" + std::string(text) + "'");
}

Direction reversed(Direction d) { return d == Direction::AtoB ? Direction::BtoA : Direction::AtoB; }

void PairDataset::validate() const {
  if (a.size() != b.size()) {
    throw ParameterError("pair dataset columns differ in length: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
  if (a.size() < 2) throw ParameterError("pair dataset needs at least 2 rows");
}

void standardize(PairDataset& data) {
  if (data.standardized) return;
  standardize(std::span<double>(data.a));
  standardize(std::span<double>(data.b));
  data.standardized = true;
}

PairDataset swapped(const PairDataset& data) {
  PairDataset out = data;
  std::swap(out.a, out.b);
  if (out.truth) out.truth = reversed(*out.truth);
  return out;
}

PairDataset subset(const PairDataset& data, const std::vector<std::size_t>& rows) {
  PairDataset out;
  out.truth = data.truth;
  out.provenance = data.provenance;
  out.a.reserve(rows.size());
  out.b.reserve(rows.size());
  for (std::size_t i : rows) {
    out.a.push_back(data.a.at(i));
    out.b.push_back(data.b.at(i));
  }
  // A subset of standardized data is no longer exactly standardized.
  out.standardized = false;
  return out;
}

}  // namespace bidd
