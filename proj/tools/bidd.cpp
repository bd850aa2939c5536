// bidd command-line interface: gen, decide, bench, ablate, real.
//
// Every option can also be set through an environment variable BIDD_<NAME>
// (e.g. BIDD_SEED, BIDD_PRESET) or through a JSON file passed with --config,
// whose top-level keys are subcommand names:
//   {"decide": {"seed": 3, "policy": "test"}}
// Precedence: command line, then environment, then config file.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 ingestion or file
// format error, 3 training failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bidd/decision/baselines.hpp"
#include "bidd/decision/report.hpp"
#include "bidd/dgp/io.hpp"
#include "bidd/error.hpp"
#include "bidd/harness/grid.hpp"
#include "bidd/harness/ingest.hpp"
#include "bidd/harness/real.hpp"

using namespace bidd;
using nlohmann::json;

namespace {

class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_configurable() && !opt->get_lnames().empty() &&
          (opt->count() > 0 || default_also)) {
        j[opt->get_lnames()[0]] = opt->as<std::string>();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      std::istringstream in(to_config(sub, default_also, false, ""));
      j[sub->get_name()] = json::parse(in);
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    return flatten(j, "", {});
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("unsupported config value " + v.dump());
  }

  std::vector<CLI::ConfigItem> flatten(const json& j, const std::string& name,
                                       std::vector<std::string> prefix) const {
    std::vector<CLI::ConfigItem> out;
    if (j.is_object()) {
      if (!name.empty()) prefix.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto sub = flatten(*it, it.key(), prefix);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    if (name.empty()) throw CLI::ConversionError("config must be a JSON object");
    CLI::ConfigItem item;
    item.name = name;
    item.parents = prefix;
    if (j.is_array()) {
      for (const auto& e : j) item.inputs.push_back(scalar(e));
    } else {
      item.inputs = {scalar(j)};
    }
    out.push_back(std::move(item));
    return out;
  }
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct BiddFlags {
  std::string preset = "desk";
  std::string policy = "total";
  std::string estimator = "hsic";
  std::string rule = "voting";
  std::size_t epochs = 0;
  std::size_t oversample = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "paper | desk")->envname("BIDD_PRESET")->capture_default_str();
    cmd->add_option("--policy", policy, "test | total")->envname("BIDD_POLICY")->capture_default_str();
    cmd->add_option("--estimator", estimator, "hsic | ksg | hsic:<scale> | ksg:<k>")
        ->envname("BIDD_ESTIMATOR")
        ->capture_default_str();
    cmd->add_option("--rule", rule, "voting | mean")->envname("BIDD_RULE")->capture_default_str();
    cmd->add_option("--epochs", epochs, "override training epochs")->envname("BIDD_EPOCHS");
    cmd->add_option("--oversample", oversample, "override noise draws per row")
        ->envname("BIDD_OVERSAMPLE");
  }

  BiddOptions options() const {
    BiddOptions o = preset_options(parse_preset(preset));
    o.policy.kind = parse_split(policy);
    o.estimators = {parse_estimator(estimator)};
    o.rule = parse_rule(rule);
    if (epochs > 0) o.train.epochs = epochs;
    if (oversample > 0) o.oversample = oversample;
    o.validate();
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiDD bivariate causal discovery"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file")->envname("BIDD_CONFIG");
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a pair dataset from a DGP spec");
  std::string gen_spec, gen_out, gen_mech = "quadratic", gen_noise = "gaussian";
  std::size_t gen_mediators = 0, gen_n = 1000;
  std::uint64_t gen_seed = 0;
  bool gen_standardize = false;
  gen->add_option("--spec", gen_spec, "DGPSpec JSON file")->envname("BIDD_SPEC");
  gen->add_option("--mechanism", gen_mech, "linear | quadratic | tanh | nn")
      ->envname("BIDD_MECHANISM");
  gen->add_option("--noise", gen_noise, "gaussian | uniform")->envname("BIDD_NOISE");
  gen->add_option("--mediators", gen_mediators)->envname("BIDD_MEDIATORS");
  gen->add_option("-n,--n", gen_n)->envname("BIDD_N");
  gen->add_option("--seed", gen_seed)->envname("BIDD_SEED");
  gen->add_flag("--standardize", gen_standardize, "write standardized columns");
  gen->add_option("-o,--out", gen_out, "CSV output (default stdout)")->envname("BIDD_OUT");

  // decide
  auto* decide = app.add_subcommand("decide", "Decide the direction of one pair file");
  std::string dec_data, dec_method = "bidd", dec_out, dec_profile, dec_loss;
  std::uint64_t dec_seed = 0;
  std::size_t dec_cap = kDefaultRowCap;
  BiddFlags dec_flags;
  decide->add_option("--data", dec_data, "pair file (CSV or whitespace separated)")
      ->required()
      ->envname("BIDD_DATA");
  decide->add_option("--method", dec_method, "bidd | varsort | mselite | residlite")
      ->envname("BIDD_METHOD")
      ->capture_default_str();
  decide->add_option("--seed", dec_seed)->envname("BIDD_SEED");
  decide->add_option("--cap", dec_cap, "row cap")->envname("BIDD_CAP");
  dec_flags.add(decide);
  decide->add_option("-o,--out", dec_out, "verdict JSON (default stdout)")->envname("BIDD_OUT");
  decide->add_option("--profile-out", dec_profile, "MI profile CSV")->envname("BIDD_PROFILE_OUT");
  decide->add_option("--loss-out", dec_loss, "loss trace prefix (writes <prefix>_a.csv, _b.csv)")
      ->envname("BIDD_LOSS_OUT");

  // bench
  auto* bench = app.add_subcommand("bench", "Run an experiment grid");
  std::string bench_grid, bench_out = "results";
  std::size_t bench_workers = 1;
  bool bench_fresh = false, bench_verbose = false;
  bench->add_option("--grid", bench_grid, "grid JSON")->required()->envname("BIDD_GRID");
  bench->add_option("-o,--out", bench_out, "output directory")->envname("BIDD_OUT");
  bench->add_option("--workers", bench_workers)->envname("BIDD_WORKERS");
  bench->add_flag("--fresh", bench_fresh, "ignore existing checkpoints");
  bench->add_flag("-v,--verbose", bench_verbose);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run an ablation over a grid");
  std::string abl_kind = "unconditional", abl_grid, abl_out = "ablation";
  std::size_t abl_workers = 1;
  bool abl_fresh = false, abl_verbose = false;
  ablate->add_option("--kind", abl_kind, "estimator | unconditional")
      ->envname("BIDD_KIND")
      ->capture_default_str();
  ablate->add_option("--grid", abl_grid, "grid JSON")->required()->envname("BIDD_GRID");
  ablate->add_option("-o,--out", abl_out, "output directory")->envname("BIDD_OUT");
  ablate->add_option("--workers", abl_workers)->envname("BIDD_WORKERS");
  ablate->add_flag("--fresh", abl_fresh, "ignore existing checkpoints");
  ablate->add_flag("-v,--verbose", abl_verbose);

  // real
  auto* real = app.add_subcommand("real", "Evaluate on a directory of real pairs");
  std::string real_dir, real_manifest, real_out;
  std::vector<std::string> real_methods{"bidd"};
  std::uint64_t real_seed = 0;
  std::size_t real_cap = kDefaultRowCap;
  BiddFlags real_flags;
  real->add_option("--dir", real_dir, "directory of pair files")->required()->envname("BIDD_DIR");
  real->add_option("--manifest", real_manifest, "file,direction CSV (default <dir>/manifest.csv)")
      ->envname("BIDD_MANIFEST");
  real->add_option("--methods", real_methods)->delimiter(',')->envname("BIDD_METHODS");
  real->add_option("--seed", real_seed)->envname("BIDD_SEED");
  real->add_option("--cap", real_cap, "row cap")->envname("BIDD_CAP");
  real_flags.add(real);
  real->add_option("-o,--out", real_out, "summary JSON (default stdout)")->envname("BIDD_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      DGPSpec spec;
      if (!gen_spec.empty()) {
        spec = dgp_spec_from_json(read_json_file(gen_spec));
      } else {
        spec = make_dgp_spec(parse_mechanism_kind(gen_mech), parse_noise_family(gen_noise),
                             gen_mediators, gen_n, gen_seed);
      }
      const PairDataset d = gen_standardize ? generate(spec) : generate_raw(spec);
      std::ostringstream out;
      write_pair_csv(d, out);
      emit(gen_out, out.str());
    } else if (decide->parsed()) {
      const Method method = parse_method(dec_method);
      Rng sub = Rng(dec_seed).split("subsample");
      const RealPair pair = ingest_pair_file(dec_data, dec_cap, sub);
      for (const auto& w : pair.warnings) std::cerr << "warning: " << w << '\n';
      VerdictContext ctx;
      ctx.seed = dec_seed;
      DirectionVerdict v;
      const auto t0 = std::chrono::steady_clock::now();
      switch (method) {
        case Method::Bidd: {
          const BiddOptions o = dec_flags.options();
          const BiddOutcome run = bidd_run(pair.data, o, dec_seed);
          v = run.verdict(0, o.rule);
          ctx.policy = std::string(to_string(o.policy.kind));
          ctx.estimator = o.estimators.front().name();
          if (!dec_profile.empty()) {
            std::ostringstream csv;
            write_profile_csv(csv, v.profile_a, v.profile_b);
            emit(dec_profile, csv.str());
          }
          if (!dec_loss.empty()) {
            std::ostringstream la, lb;
            write_loss_trace(la, run.trace_a);
            write_loss_trace(lb, run.trace_b);
            emit(dec_loss + "_a.csv", la.str());
            emit(dec_loss + "_b.csv", lb.str());
          }
          break;
        }
        case Method::VarSort: v = baseline_var_sort(pair.raw); break;
        case Method::MseLite: v = baseline_mse_min(pair.data); break;
        case Method::ResidLite: v = baseline_resid_indep(pair.data); break;
      }
      ctx.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      emit(dec_out, verdict_to_json(v, ctx).dump(2) + "\n");
    } else if (bench->parsed()) {
      const ExperimentGrid grid = grid_from_json(read_json_file(bench_grid));
      const auto table = run_grid(grid, bench_out, {bench_workers, !bench_fresh, !bench_verbose});
      for (const auto& row : table.rows) {
        std::cout << row.cell.label() << ' ' << row.method << ' ' << row.correct << '/'
                  << row.seeds << '\n';
      }
    } else if (ablate->parsed()) {
      const ExperimentGrid grid = grid_from_json(read_json_file(abl_grid));
      const auto table = run_ablation(parse_ablation(abl_kind), grid, abl_out,
                                      {abl_workers, !abl_fresh, !abl_verbose});
      for (const auto& row : table.rows) {
        std::cout << row.cell.label() << ' ' << row.method << ' ' << row.correct << '/'
                  << row.seeds << '\n';
      }
    } else if (real->parsed()) {
      RealBenchmarkOptions o;
      o.methods.clear();
      for (const auto& m : real_methods) o.methods.push_back(parse_method(m));
      o.bidd = real_flags.options();
      o.cap = real_cap;
      o.seed = real_seed;
      const std::filesystem::path manifest =
          real_manifest.empty() ? std::filesystem::path(real_dir) / "manifest.csv"
                                : std::filesystem::path(real_manifest);
      const RealSummary s = run_real_benchmark(real_dir, manifest, o);
      for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
      emit(real_out, s.to_json().dump(2) + "\n");
    }
  } catch (const IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "training failed at epoch " << e.epoch() << " (lr " << e.lr() << "): " << e.what()
              << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
