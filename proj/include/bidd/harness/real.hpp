#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bidd/harness/grid.hpp"
#include "bidd/harness/ingest.hpp"

namespace bidd {

/// CSV "file,direction": direction is AtoB/BtoA (or a->b/b->a).
std::map<std::string, Direction> read_manifest(const std::filesystem::path& path);

struct RealBenchmarkOptions {
  std::vector<Method> methods{Method::Bidd};
  BiddOptions bidd = preset_options(Preset::Desk);
  std::size_t cap = kDefaultRowCap;
  std::uint64_t seed = 0;
};

struct RealPairResult {
  std::string file;
  std::string method;
  Direction truth = Direction::AtoB;
  std::optional<Direction> verdict;
  std::size_t rows = 0;
  std::size_t rows_dropped = 0;
  double margin = 0.0;
  std::string error;
};

struct RealSummary {
  std::vector<RealPairResult> pairs;
  std::map<std::string, double> accuracy;  // simple average over pairs, per method
  std::map<std::string, std::size_t> evaluated;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// Runs every method on each data file in dir that has a manifest entry.
/// Files without an entry (and entries without a file) are skipped with a
/// warning; failures on one pair are recorded and count as incorrect. Throws
/// IngestionError when the directory holds no usable pair file.
RealSummary run_real_benchmark(const std::filesystem::path& dir,
                               const std::filesystem::path& manifest,
                               const RealBenchmarkOptions& opts);

}  // namespace bidd
