#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "bidd/dgp/pair_dataset.hpp"
#include "bidd/numerics/rng.hpp"

namespace bidd {

constexpr std::size_t kDefaultRowCap = 3000;
constexpr std::size_t kMinIngestRows = 50;

struct RealPair {
  std::string name;
  PairDataset raw;   // after dropping and subsampling, before standardization
  PairDataset data;  // standardized copy of raw
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;  // rows with a non-finite value
  std::vector<std::string> warnings;
};

/// Whitespace- or comma-separated numeric text. A first line that does not
/// parse is taken as a header. Rows with NaN or infinite entries are dropped;
/// extra columns are ignored with a warning. More than `cap` rows are
/// subsampled without replacement (original order kept) using rng. Throws
/// IngestionError (with line number where applicable) on unreadable files,
/// unparsable tokens, fewer than two columns or fewer than 50 usable rows.
RealPair ingest_pair_stream(std::istream& in, const std::string& name, std::size_t cap, Rng& rng);
RealPair ingest_pair_file(const std::filesystem::path& path, std::size_t cap, Rng& rng);

}  // namespace bidd
