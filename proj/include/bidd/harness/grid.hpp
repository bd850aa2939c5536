#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bidd/decision/bidd.hpp"
#include "bidd/dgp/generator.hpp"
#include "bidd/harness/presets.hpp"

namespace bidd {

enum class Method { Bidd, VarSort, MseLite, ResidLite };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct GridCell {
  MechanismKind mechanism = MechanismKind::Quadratic;
  NoiseFamily noise = NoiseFamily::Gaussian;
  std::size_t mediators = 0;
  std::size_t n = 1000;

  std::string label() const;  // e.g. "quadratic/gaussian/m1/n1000"
  bool operator==(const GridCell&) const = default;
};

struct ExperimentGrid {
  std::vector<MechanismKind> mechanisms{MechanismKind::Quadratic};
  std::vector<NoiseFamily> noises{NoiseFamily::Gaussian};
  std::vector<std::size_t> mediators{0};
  std::vector<std::size_t> sizes{1000};
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods{Method::Bidd};
  bool include_linear_gaussian = false;
  Preset preset = Preset::Desk;
  BiddOptions bidd = preset_options(Preset::Desk);

  /// Cartesian product; linear + Gaussian cells are skipped unless included.
  std::vector<GridCell> cells() const;
  void validate() const;
};

/// Keys: mechanisms, noises, mediators, sizes, seeds, methods,
/// include_linear_gaussian, preset, policy, estimator, rule, and optional
/// overrides epochs, oversample, T, width, res_blocks, lr_init, lr_final.
/// Unknown keys raise ConfigError.
ExperimentGrid grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentGrid& grid);

/// One forced decision (or failure) for one cell, seed and method label.
struct VerdictRecord {
  GridCell cell;
  std::uint64_t seed = 0;
  std::string method;
  std::optional<Direction> verdict;  // empty when the run failed
  Direction truth = Direction::AtoB;
  bool tie = false;
  double margin = 0.0;
  double runtime_seconds = 0.0;
  std::string error;

  bool correct() const { return verdict && *verdict == truth; }
};

struct ResultRow {
  GridCell cell;
  std::string method;
  std::size_t seeds = 0;
  std::size_t correct = 0;
  std::size_t failures = 0;
  double accuracy = 0.0;
  double mean_runtime_seconds = 0.0;
};

struct ResultTable {
  std::vector<VerdictRecord> records;
  std::vector<ResultRow> rows;

  const ResultRow* find(const GridCell& cell, const std::string& method) const;
};

struct RunOptions {
  std::size_t workers = 1;
  bool resume = true;
  bool quiet = true;
};

/// Every (cell, seed) unit writes a checkpoint under out_dir/units/ named by
/// a content hash of the unit specification; existing checkpoints are reused.
/// Writes out_dir/records.csv, out_dir/summary.csv (no runtimes, so reruns
/// are byte-identical) and out_dir/results.json (with runtimes). Failures are
/// recorded per unit and count as incorrect.
ResultTable run_grid(const ExperimentGrid& grid, const std::filesystem::path& out_dir,
                     const RunOptions& opts = {});

/// MIEstimator: HSIC with bandwidth scale 0.5/1/2 and KSG with k 3/5/10, each
/// under voting and mean, from one BiDD run per (cell, seed).
/// Unconditional: conditional and unconditional BiDD side by side.
enum class AblationKind { MIEstimator, Unconditional };

std::string_view to_string(AblationKind k);
AblationKind parse_ablation(std::string_view text);

ResultTable run_ablation(AblationKind kind, const ExperimentGrid& grid,
                         const std::filesystem::path& out_dir, const RunOptions& opts = {});

/// Accuracy per (cell, method) from records, in first-appearance order.
std::vector<ResultRow> aggregate(const std::vector<VerdictRecord>& records);

}  // namespace bidd
