#include "bidd/harness/grid.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "../common/text.hpp"
#include "bidd/decision/baselines.hpp"
#include "bidd/dgp/io.hpp"
#include "bidd/error.hpp"

namespace bidd {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Bidd: return "bidd";
    case Method::VarSort: return "varsort";
    case Method::MseLite: return "mselite";
    case Method::ResidLite: return "residlite";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  const auto s = detail::lower(detail::trim(text));
  if (s == "bidd") return Method::Bidd;
  if (s == "varsort" || s == "var-sort") return Method::VarSort;
  if (s == "mselite" || s == "mse") return Method::MseLite;
  if (s == "residlite" || s == "resid") return Method::ResidLite;
  throw ConfigError("unknown method: " + std::string(text));
}

std::string_view to_string(AblationKind k) {
  return k == AblationKind::MIEstimator ? "estimator" : "unconditional";
}

AblationKind parse_ablation(std::string_view text) {
  const auto s = detail::lower(detail::trim(text));
  if (s == "estimator" || s == "miestimator" || s == "mi") return AblationKind::MIEstimator;
  if (s == "unconditional" || s == "conditioning") return AblationKind::Unconditional;
  throw ConfigError("unknown ablation: " + std::string(text));
}

std::string GridCell::label() const {
  return std::string(to_string(mechanism)) + "/" + std::string(to_string(noise)) + "/m" +
         std::to_string(mediators) + "/n" + std::to_string(n);
}

std::vector<GridCell> ExperimentGrid::cells() const {
  std::vector<GridCell> out;
  for (auto m : mechanisms) {
    for (auto z : noises) {
      if (m == MechanismKind::Linear && z == NoiseFamily::Gaussian && !include_linear_gaussian) {
        continue;
      }
      for (auto k : mediators) {
        for (auto n : sizes) out.push_back({m, z, k, n});
      }
    }
  }
  return out;
}

void ExperimentGrid::validate() const {
  if (seeds.empty()) throw ConfigError("grid needs an explicit, non-empty seed list");
  if (methods.empty()) throw ConfigError("grid needs at least one method");
  if (cells().empty()) throw ConfigError("grid has no cells");
  for (auto n : sizes) {
    if (n < kMinDecideRows) throw ConfigError("grid sample sizes must be at least 50");
  }
  bidd.validate();
}

namespace {

template <class T, class F>
std::vector<T> parse_list(const json& j, const char* key, F parse) {
  std::vector<T> out;
  const json& v = j.at(key);
  if (!v.is_array()) return {parse(v)};
  for (const auto& e : v) out.push_back(parse(e));
  return out;
}

const char* const kGridKeys[] = {"mechanisms", "noises",     "mediators",  "sizes",    "seeds",
                                 "methods",    "include_linear_gaussian", "preset", "policy",
                                 "estimator",  "rule",       "epochs",     "oversample", "T",
                                 "width",      "res_blocks", "lr_init",    "lr_final"};

}  // namespace

ExperimentGrid grid_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("grid must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(kGridKeys), std::end(kGridKeys),
                     [&](const char* k) { return key == k; }) == std::end(kGridKeys)) {
      throw ConfigError("unknown grid key: " + key);
    }
  }
  ExperimentGrid g;
  try {
    if (j.contains("preset")) g.preset = parse_preset(j.at("preset").get<std::string>());
    g.bidd = preset_options(g.preset);
    auto str = [](const json& e) { return e.get<std::string>(); };
    if (j.contains("mechanisms")) {
      g.mechanisms = parse_list<MechanismKind>(
          j, "mechanisms", [&](const json& e) { return parse_mechanism_kind(str(e)); });
    }
    if (j.contains("noises")) {
      g.noises = parse_list<NoiseFamily>(
          j, "noises", [&](const json& e) { return parse_noise_family(str(e)); });
    }
    if (j.contains("mediators")) {
      g.mediators = parse_list<std::size_t>(j, "mediators",
                                            [](const json& e) { return e.get<std::size_t>(); });
    }
    if (j.contains("sizes")) {
      g.sizes =
          parse_list<std::size_t>(j, "sizes", [](const json& e) { return e.get<std::size_t>(); });
    }
    if (j.contains("seeds")) {
      g.seeds = parse_list<std::uint64_t>(j, "seeds",
                                          [](const json& e) { return e.get<std::uint64_t>(); });
    }
    if (j.contains("methods")) {
      g.methods =
          parse_list<Method>(j, "methods", [&](const json& e) { return parse_method(str(e)); });
    }
    if (j.contains("include_linear_gaussian")) {
      g.include_linear_gaussian = j.at("include_linear_gaussian").get<bool>();
    }
    if (j.contains("policy")) g.bidd.policy.kind = parse_split(str(j.at("policy")));
    if (j.contains("estimator")) g.bidd.estimators = {parse_estimator(str(j.at("estimator")))};
    if (j.contains("rule")) g.bidd.rule = parse_rule(str(j.at("rule")));
    if (j.contains("epochs")) g.bidd.train.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("oversample")) g.bidd.oversample = j.at("oversample").get<std::size_t>();
    if (j.contains("T")) {
      g.bidd.train.T = j.at("T").get<std::size_t>();
      g.bidd.train.model.t_max = g.bidd.train.T;
    }
    if (j.contains("width")) g.bidd.train.model.width = j.at("width").get<std::size_t>();
    if (j.contains("res_blocks")) {
      g.bidd.train.model.n_res_blocks = j.at("res_blocks").get<std::size_t>();
    }
    if (j.contains("lr_init")) g.bidd.train.lr_init = j.at("lr_init").get<double>();
    if (j.contains("lr_final")) g.bidd.train.lr_final = j.at("lr_final").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad grid value: ") + e.what());
  }
  g.validate();
  return g;
}

json to_json(const ExperimentGrid& g) {
  json j;
  j["mechanisms"] = json::array();
  for (auto m : g.mechanisms) j["mechanisms"].push_back(std::string(to_string(m)));
  j["noises"] = json::array();
  for (auto z : g.noises) j["noises"].push_back(std::string(to_string(z)));
  j["mediators"] = g.mediators;
  j["sizes"] = g.sizes;
  j["seeds"] = g.seeds;
  j["methods"] = json::array();
  for (auto m : g.methods) j["methods"].push_back(std::string(to_string(m)));
  j["include_linear_gaussian"] = g.include_linear_gaussian;
  j["preset"] = std::string(to_string(g.preset));
  j["bidd"] = to_json(g.bidd);
  return j;
}

const ResultRow* ResultTable::find(const GridCell& cell, const std::string& method) const {
  for (const auto& r : rows) {
    if (r.cell == cell && r.method == method) return &r;
  }
  return nullptr;
}

std::vector<ResultRow> aggregate(const std::vector<VerdictRecord>& records) {
  std::vector<ResultRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.cell.label(), r.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      ResultRow row;
      row.cell = r.cell;
      row.method = r.method;
      rows.push_back(row);
    }
    auto& row = rows[it->second];
    ++row.seeds;
    row.correct += r.correct();
    row.failures += !r.verdict.has_value();
    row.mean_runtime_seconds += r.runtime_seconds;
  }
  for (auto& row : rows) {
    row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.seeds);
    row.mean_runtime_seconds /= static_cast<double>(row.seeds);
  }
  return rows;
}

namespace {

struct Unit {
  GridCell cell;
  std::uint64_t seed = 0;
  json spec;
};

json record_json(const VerdictRecord& r) {
  json j;
  j["cell"] = r.cell.label();
  j["mechanism"] = std::string(to_string(r.cell.mechanism));
  j["noise"] = std::string(to_string(r.cell.noise));
  j["mediators"] = r.cell.mediators;
  j["n"] = r.cell.n;
  j["seed"] = r.seed;
  j["method"] = r.method;
  j["truth"] = std::string(to_string(r.truth));
  j["verdict"] = r.verdict ? json(std::string(to_string(*r.verdict))) : json(nullptr);
  j["correct"] = r.correct();
  j["tie"] = r.tie;
  j["margin"] = r.margin;
  j["runtime_seconds"] = r.runtime_seconds;
  j["error"] = r.error;
  return j;
}

VerdictRecord record_from_json(const json& j, const GridCell& cell) {
  VerdictRecord r;
  r.cell = cell;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.method = j.at("method").get<std::string>();
  r.truth = parse_direction(j.at("truth").get<std::string>());
  if (!j.at("verdict").is_null()) r.verdict = parse_direction(j.at("verdict").get<std::string>());
  r.tie = j.at("tie").get<bool>();
  r.margin = j.at("margin").get<double>();
  r.runtime_seconds = j.at("runtime_seconds").get<double>();
  r.error = j.at("error").get<std::string>();
  return r;
}

using UnitFn = std::vector<VerdictRecord> (*)(const Unit&, const ExperimentGrid&);

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VerdictRecord base_record(const Unit& u, std::string method) {
  VerdictRecord r;
  r.cell = u.cell;
  r.seed = u.seed;
  r.method = std::move(method);
  r.truth = Direction::AtoB;
  return r;
}

PairDataset unit_data(const Unit& u) {
  return generate_raw(make_dgp_spec(u.cell.mechanism, u.cell.noise, u.cell.mediators, u.cell.n,
                                    u.seed));
}

template <class F>
VerdictRecord guarded(const Unit& u, std::string method, F&& f) {
  VerdictRecord r = base_record(u, std::move(method));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const DirectionVerdict v = f();
    r.verdict = v.verdict;
    r.tie = v.tie;
    r.margin = v.margin;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.runtime_seconds = seconds_since(t0);
  return r;
}

std::string bidd_label(const BiddOptions& o) {
  return "bidd_" + std::string(to_string(o.policy.kind));
}

std::vector<VerdictRecord> grid_unit(const Unit& u, const ExperimentGrid& g) {
  const PairDataset raw = unit_data(u);
  PairDataset data = raw;
  standardize(data);
  std::vector<VerdictRecord> out;
  for (Method m : g.methods) {
    switch (m) {
      case Method::Bidd:
        out.push_back(guarded(u, bidd_label(g.bidd),
                              [&] { return bidd_decide(data, g.bidd, u.seed); }));
        break;
      case Method::VarSort:
        out.push_back(guarded(u, "varsort", [&] { return baseline_var_sort(raw); }));
        break;
      case Method::MseLite:
        out.push_back(guarded(u, "mselite", [&] { return baseline_mse_min(data); }));
        break;
      case Method::ResidLite:
        out.push_back(guarded(u, "residlite", [&] { return baseline_resid_indep(data); }));
        break;
    }
  }
  return out;
}

std::vector<Estimator> estimator_sweep() {
  return {Estimator::make_hsic(0.5), Estimator::make_hsic(1.0), Estimator::make_hsic(2.0),
          Estimator::make_ksg(3),    Estimator::make_ksg(5),    Estimator::make_ksg(10)};
}

std::vector<VerdictRecord> estimator_unit(const Unit& u, const ExperimentGrid& g) {
  PairDataset data = unit_data(u);
  standardize(data);
  BiddOptions o = g.bidd;
  o.estimators = estimator_sweep();
  std::vector<VerdictRecord> out;
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<BiddOutcome> run;
  std::string error;
  try {
    run = bidd_run(data, o, u.seed);
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double runtime = seconds_since(t0);
  for (std::size_t e = 0; e < o.estimators.size(); ++e) {
    for (Rule rule : {Rule::Voting, Rule::Mean}) {
      VerdictRecord r = base_record(u, bidd_label(o) + "[" + o.estimators[e].name() + "," +
                                           std::string(to_string(rule)) + "]");
      r.runtime_seconds = runtime;
      if (run) {
        const auto v = run->verdict(e, rule);
        r.verdict = v.verdict;
        r.tie = v.tie;
        r.margin = v.margin;
      } else {
        r.error = error;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<VerdictRecord> conditioning_unit(const Unit& u, const ExperimentGrid& g) {
  PairDataset data = unit_data(u);
  standardize(data);
  std::vector<VerdictRecord> out;
  for (bool conditional : {true, false}) {
    BiddOptions o = g.bidd;
    o.train.conditional = conditional;
    out.push_back(guarded(u, bidd_label(o) + (conditional ? "_conditional" : "_unconditional"),
                          [&] { return bidd_decide(data, o, u.seed); }));
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_outputs(const ResultTable& table, const json& header, const fs::path& dir) {
  std::ostringstream rec;
  rec << "mechanism,noise,mediators,n,seed,method,truth,verdict,correct,tie,margin,error\n";
  for (const auto& r : table.records) {
    rec << to_string(r.cell.mechanism) << ',' << to_string(r.cell.noise) << ','
        << r.cell.mediators << ',' << r.cell.n << ',' << r.seed << ',' << csv_field(r.method)
        << ',' << to_string(r.truth) << ',' << (r.verdict ? to_string(*r.verdict) : "") << ','
        << (r.correct() ? 1 : 0) << ',' << (r.tie ? 1 : 0) << ',' << format_double(r.margin)
        << ',' << csv_field(r.error) << '\n';
  }
  write_file_atomic(dir / "records.csv", rec.str());

  std::ostringstream sum;
  sum << "mechanism,noise,mediators,n,method,seeds,correct,failures,accuracy\n";
  for (const auto& row : table.rows) {
    sum << to_string(row.cell.mechanism) << ',' << to_string(row.cell.noise) << ','
        << row.cell.mediators << ',' << row.cell.n << ',' << csv_field(row.method) << ','
        << row.seeds << ',' << row.correct << ',' << row.failures << ','
        << format_double(row.accuracy) << '\n';
  }
  write_file_atomic(dir / "summary.csv", sum.str());

  json j = header;
  j["rows"] = json::array();
  for (const auto& row : table.rows) {
    j["rows"].push_back({{"cell", row.cell.label()},
                         {"method", row.method},
                         {"seeds", row.seeds},
                         {"correct", row.correct},
                         {"failures", row.failures},
                         {"accuracy", row.accuracy},
                         {"mean_runtime_seconds", row.mean_runtime_seconds}});
  }
  j["records"] = json::array();
  for (const auto& r : table.records) j["records"].push_back(record_json(r));
  write_file_atomic(dir / "results.json", j.dump(2) + "\n");
}

ResultTable run_units(const std::string& kind, UnitFn fn, const ExperimentGrid& grid,
                      const fs::path& out_dir, const RunOptions& opts) {
  grid.validate();
  fs::create_directories(out_dir / "units");
  const json grid_json = to_json(grid);

  std::vector<Unit> units;
  for (const auto& cell : grid.cells()) {
    for (auto seed : grid.seeds) {
      Unit u;
      u.cell = cell;
      u.seed = seed;
      u.spec = {{"kind", kind},
                {"cell", cell.label()},
                {"seed", seed},
                {"methods", grid_json["methods"]},
                {"bidd", grid_json["bidd"]}};
      units.push_back(std::move(u));
    }
  }

  std::vector<std::vector<VerdictRecord>> results(units.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      const Unit& u = units[i];
      try {
        const fs::path ckpt = out_dir / "units" / (hex64(fnv1a64(u.spec.dump())) + ".json");
        if (opts.resume && fs::exists(ckpt)) {
          std::ifstream in(ckpt);
          const json saved = json::parse(in, nullptr, false);
          if (!saved.is_discarded() && saved.value("spec", json()) == u.spec) {
            for (const auto& r : saved.at("records")) {
              results[i].push_back(record_from_json(r, u.cell));
            }
            continue;
          }
        }
        results[i] = fn(u, grid);
        json saved = {{"spec", u.spec}, {"records", json::array()}};
        for (const auto& r : results[i]) saved["records"].push_back(record_json(r));
        std::lock_guard lock(io);
        write_file_atomic(ckpt, saved.dump(2) + "\n");
        if (!opts.quiet) {
          for (const auto& r : results[i]) {
            std::cerr << kind << ' ' << u.cell.label() << " seed " << u.seed << ' ' << r.method
                      << ": " << (r.verdict ? to_string(*r.verdict) : "failed") << " ("
                      << r.runtime_seconds << " s)\n";
          }
        }
      } catch (...) {
        std::lock_guard lock(io);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(opts.workers, units.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ResultTable table;
  for (auto& rs : results) {
    for (auto& r : rs) table.records.push_back(std::move(r));
  }
  table.rows = aggregate(table.records);
  write_outputs(table, {{"kind", kind}, {"grid", grid_json}}, out_dir);
  return table;
}

}  // namespace

ResultTable run_grid(const ExperimentGrid& grid, const fs::path& out_dir, const RunOptions& opts) {
  return run_units("grid", grid_unit, grid, out_dir, opts);
}

ResultTable run_ablation(AblationKind kind, const ExperimentGrid& grid, const fs::path& out_dir,
                         const RunOptions& opts) {
  if (kind == AblationKind::MIEstimator) {
    return run_units("ablation-estimator", estimator_unit, grid, out_dir, opts);
  }
  return run_units("ablation-unconditional", conditioning_unit, grid, out_dir, opts);
}

}  // namespace bidd
