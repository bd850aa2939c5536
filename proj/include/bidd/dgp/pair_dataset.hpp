#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bidd {

/// Causal direction between the two observed columns.
enum class Direction { AtoB, BtoA };

std::string_view to_string(Direction d);
/// Accepts "AtoB"/"BtoA" and the arrow spellings "a->b"/"b->a" (case-insensitive).
Direction parse_direction(std::string_view text);
Direction reversed(Direction d);

/// n paired scalar observations.
struct PairDataset {
  std::vector<double> a;
  std::vector<double> b;
  std::optional<Direction> truth;
  bool standardized = false;
  std::string provenance;

  std::size_t size() const noexcept { return a.size(); }
  /// Throws ParameterError unless both columns have the same length >= 2.
  void validate() const;
};

/// Standardize both columns in place; a no-op when already standardized.
void standardize(PairDataset& data);

/// Columns exchanged; the truth label is flipped with them.
PairDataset swapped(const PairDataset& data);

/// Rows selected by index, in the given order.
PairDataset subset(const PairDataset& data, const std::vector<std::size_t>& rows);

}  // namespace bidd
