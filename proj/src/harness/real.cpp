#include "bidd/harness/real.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "../common/text.hpp"
#include "bidd/decision/baselines.hpp"
#include "bidd/error.hpp"

namespace bidd {

namespace fs = std::filesystem;

std::map<std::string, Direction> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open manifest " + path.string());
  std::map<std::string, Direction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw IngestionError("manifest needs \"file,direction\"", lineno);
    }
    const auto file = std::string(detail::trim(text.substr(0, comma)));
    const auto dir = detail::trim(text.substr(comma + 1));
    if (lineno == 1 && detail::lower(file) == "file") continue;
    try {
      out[file] = parse_direction(dir);
    } catch (const std::exception&) {
      throw IngestionError("bad direction \"" + std::string(dir) + "\" in manifest", lineno);
    }
  }
  return out;
}

nlohmann::json RealSummary::to_json() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["evaluated"] = evaluated;
  j["warnings"] = warnings;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs) {
    j["pairs"].push_back({{"file", p.file},
                          {"method", p.method},
                          {"truth", std::string(bidd::to_string(p.truth))},
                          {"verdict", p.verdict ? nlohmann::json(std::string(bidd::to_string(*p.verdict)))
                                                : nlohmann::json(nullptr)},
                          {"rows", p.rows},
                          {"rows_dropped", p.rows_dropped},
                          {"margin", p.margin},
                          {"error", p.error}});
  }
  return j;
}

RealSummary run_real_benchmark(const fs::path& dir, const fs::path& manifest,
                               const RealBenchmarkOptions& opts) {
  if (!fs::is_directory(dir)) throw IngestionError("not a directory: " + dir.string());
  if (opts.methods.empty()) throw ConfigError("no methods given");
  const auto truth = read_manifest(manifest);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (fs::exists(manifest) && fs::equivalent(entry.path(), manifest)) continue;
    const auto name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  RealSummary summary;
  std::set<std::string> present;
  std::size_t usable = 0;
  for (const auto& path : files) {
    const auto name = path.filename().string();
    present.insert(name);
    const auto it = truth.find(name);
    if (it == truth.end()) {
      summary.warnings.push_back(name + ": no manifest entry, skipped");
      continue;
    }
    const Rng pair_rng = Rng(opts.seed).split(name);
    RealPair pair;
    try {
      Rng sub = pair_rng.split("subsample");
      pair = ingest_pair_file(path, opts.cap, sub);
    } catch (const IngestionError& e) {
      summary.warnings.push_back(e.what());
      for (Method m : opts.methods) {
        RealPairResult r;
        r.file = name;
        r.method = std::string(to_string(m));
        r.truth = it->second;
        r.error = e.what();
        summary.pairs.push_back(r);
      }
      continue;
    }
    ++usable;
    for (auto& w : pair.warnings) summary.warnings.push_back(w);
    for (Method m : opts.methods) {
      RealPairResult r;
      r.file = name;
      r.method = std::string(to_string(m));
      r.truth = it->second;
      r.rows = pair.data.size();
      r.rows_dropped = pair.rows_dropped;
      try {
        DirectionVerdict v;
        switch (m) {
          case Method::Bidd: v = bidd_decide(pair.data, opts.bidd, pair_rng.seed()); break;
          case Method::VarSort: v = baseline_var_sort(pair.raw); break;
          case Method::MseLite: v = baseline_mse_min(pair.data); break;
          case Method::ResidLite: v = baseline_resid_indep(pair.data); break;
        }
        r.verdict = v.verdict;
        r.margin = v.margin;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      summary.pairs.push_back(std::move(r));
    }
  }
  for (const auto& [name, _] : truth) {
    if (!present.count(name)) summary.warnings.push_back(name + ": listed in manifest but missing");
  }
  if (usable == 0) throw IngestionError("no usable pair files in " + dir.string());

  std::map<std::string, std::size_t> correct;
  for (const auto& p : summary.pairs) {
    ++summary.evaluated[p.method];
    correct[p.method] += p.verdict && *p.verdict == p.truth;
  }
  for (const auto& [method, n] : summary.evaluated) {
    summary.accuracy[method] = static_cast<double>(correct[method]) / static_cast<double>(n);
  }
  return summary;
}

}  // namespace bidd
