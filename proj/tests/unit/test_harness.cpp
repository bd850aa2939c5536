#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bidd/error.hpp"
#include "bidd/harness/grid.hpp"
#include "bidd/harness/ingest.hpp"
#include "bidd/harness/real.hpp"
#include "bidd/numerics/sampling.hpp"

using namespace bidd;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bidd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string pair_text(std::size_t rows, double scale_b, std::uint64_t seed, char sep = ' ') {
  Rng rng(seed);
  std::ostringstream out;
  for (std::size_t i = 0; i < rows; ++i) {
    const double x = rng.normal();
    out << x << sep << scale_b * (x + 0.5 * rng.normal()) << '\n';
  }
  return out.str();
}

RealPair ingest_text(const std::string& text, std::size_t cap = kDefaultRowCap) {
  std::istringstream in(text);
  Rng rng(1);
  return ingest_pair_stream(in, "mem", cap, rng);
}

ExperimentGrid tiny_grid() {
  ExperimentGrid g;
  g.mechanisms = {MechanismKind::Quadratic};
  g.noises = {NoiseFamily::Uniform};
  g.mediators = {0};
  g.sizes = {60};
  g.seeds = {1, 2};
  g.bidd.train.T = 4;
  g.bidd.train.epochs = 3;
  g.bidd.train.model.width = 8;
  g.bidd.train.model.t_max = 4;
  g.bidd.oversample = 2;
  return g;
}

}  // namespace

TEST_CASE("ingestion caps rows by subsampling without replacement") {
  const auto p = ingest_text(pair_text(5000, 1.0, 3));
  CHECK(p.rows_read == 5000);
  CHECK(p.raw.size() == 3000);
  CHECK(p.data.size() == 3000);
  CHECK(p.data.standardized);
  CHECK(std::abs(mean(p.data.a)) < 1e-9);
  CHECK(std::abs(variance(p.data.b) - 1.0) < 1e-9);
  // Subsampled rows are original rows, in original order, without repeats.
  const auto full = ingest_text(pair_text(5000, 1.0, 3), 5000);
  std::size_t j = 0;
  for (std::size_t i = 0; i < p.raw.size(); ++i) {
    while (j < full.raw.size() && full.raw.a[j] != p.raw.a[i]) ++j;
    REQUIRE(j < full.raw.size());
    CHECK(full.raw.b[j] == p.raw.b[i]);
    ++j;
  }
  CHECK(ingest_text(pair_text(200, 1.0, 3)).raw.size() == 200);
}

TEST_CASE("ingestion drops non-finite rows and reports them") {
  std::string text = "x y\n" + pair_text(60, 2.0, 4);
  text += "nan 1.0\n3.0 inf\n";
  const auto p = ingest_text(text);
  CHECK(p.rows_read == 62);
  CHECK(p.rows_dropped == 2);
  CHECK(p.raw.size() == 60);
  REQUIRE_FALSE(p.warnings.empty());
  for (double v : p.raw.b) CHECK(std::isfinite(v));

  const auto one = ingest_text(pair_text(60, 1.0, 5) + "NaN,NaN\n");
  CHECK(one.rows_dropped == 1);
}

TEST_CASE("ingestion formats and errors") {
  SUBCASE("comma separated with header") {
    const auto p = ingest_text("a,b\n" + pair_text(60, 1.0, 6, ','));
    CHECK(p.raw.size() == 60);
  }
  SUBCASE("extra columns are ignored with a warning") {
    std::string text;
    for (int i = 0; i < 60; ++i) text += std::to_string(i) + "\t" + std::to_string(i * i) + "\t7\n";
    const auto p = ingest_text(text);
    CHECK(p.raw.b[3] == 9.0);
    REQUIRE(p.warnings.size() == 1);
    CHECK(p.warnings[0].find("first two") != std::string::npos);
  }
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(ingest_text(pair_text(49, 1.0, 7)), IngestionError);
  }
  SUBCASE("single column") {
    CHECK_THROWS_AS(ingest_text("1\n2\n3\n"), IngestionError);
  }
  SUBCASE("unparsable value carries its line number") {
    std::string text = pair_text(60, 1.0, 8);
    text += "1.0 abc\n";
    try {
      ingest_text(text);
      FAIL("expected an ingestion error");
    } catch (const IngestionError& e) {
      CHECK(e.line() == 61);
    }
  }
  SUBCASE("missing file") {
    Rng rng(1);
    CHECK_THROWS_AS(ingest_pair_file("/nonexistent/pair.txt", 3000, rng), IngestionError);
  }
}

TEST_CASE("real-pair benchmark over a manifest") {
  const fs::path dir = scratch_dir("real");
  // Var-sort picks the lower-variance column as the cause.
  std::ofstream(dir / "p1.txt") << pair_text(400, 3.0, 1);   // AtoB, right
  std::ofstream(dir / "p2.txt") << pair_text(400, 0.2, 2);   // looks BtoA, truth AtoB: wrong
  std::ofstream(dir / "p3.txt") << pair_text(4000, 0.2, 3);  // BtoA, right; subsampled
  std::ofstream(dir / "extra.txt") << pair_text(100, 1.0, 4);
  std::ofstream(dir / "manifest.csv") << "file,direction\np1.txt,AtoB\np2.txt,a->b\np3.txt,BtoA\n"
                                         "gone.txt,AtoB\n";
  const auto manifest = read_manifest(dir / "manifest.csv");
  CHECK(manifest.size() == 4);
  CHECK(manifest.at("p3.txt") == Direction::BtoA);

  RealBenchmarkOptions o;
  o.methods = {Method::VarSort, Method::MseLite};
  const auto s = run_real_benchmark(dir, dir / "manifest.csv", o);
  CHECK(s.evaluated.at("varsort") == 3);
  CHECK(s.accuracy.at("varsort") == doctest::Approx(2.0 / 3.0));
  const double acc = s.accuracy.at("mselite") * 3.0;
  CHECK(acc == doctest::Approx(std::round(acc)));
  bool warned_extra = false, warned_gone = false;
  for (const auto& w : s.warnings) {
    warned_extra |= w.find("extra.txt") != std::string::npos;
    warned_gone |= w.find("gone.txt") != std::string::npos;
  }
  CHECK(warned_extra);
  CHECK(warned_gone);
  for (const auto& p : s.pairs) CHECK(p.rows <= kDefaultRowCap);
  CHECK(s.to_json()["pairs"].size() == 6);

  const fs::path empty = scratch_dir("real_empty");
  std::ofstream(empty / "manifest.csv") << "file,direction\n";
  CHECK_THROWS_AS(run_real_benchmark(empty, empty / "manifest.csv", o), IngestionError);
  CHECK_THROWS_AS(read_manifest(empty / "none.csv"), IngestionError);
}

TEST_CASE("grid parsing") {
  const auto j = nlohmann::json::parse(R"({
    "mechanisms": ["linear", "quadratic"], "noises": ["gaussian", "uniform"],
    "mediators": [0, 1], "sizes": [500], "seeds": [0, 1, 2],
    "methods": ["varsort", "residlite"], "preset": "desk", "policy": "test",
    "estimator": "ksg:5", "rule": "mean", "epochs": 10
  })");
  const auto g = grid_from_json(j);
  // linear + gaussian is left out by default.
  CHECK(g.cells().size() == 6);
  CHECK(g.bidd.policy.kind == SplitKind::Test);
  CHECK(g.bidd.estimators.front().name() == "ksg(k=5)");
  CHECK(g.bidd.rule == Rule::Mean);
  CHECK(g.bidd.train.epochs == 10);
  auto with_lg = j;
  with_lg["include_linear_gaussian"] = true;
  CHECK(grid_from_json(with_lg).cells().size() == 8);

  auto bad = j;
  bad["colour"] = "red";
  CHECK_THROWS_AS(grid_from_json(bad), ConfigError);
  auto no_seeds = j;
  no_seeds["seeds"] = nlohmann::json::array();
  CHECK_THROWS_AS(grid_from_json(no_seeds), ConfigError);
  auto bad_method = j;
  bad_method["methods"] = {"oracle"};
  CHECK_THROWS_AS(grid_from_json(bad_method), ConfigError);
}

TEST_CASE("var-sort grid smoke run is deterministic and resumable") {
  ExperimentGrid g = tiny_grid();
  g.methods = {Method::VarSort, Method::MseLite};
  const fs::path dir = scratch_dir("grid");
  const auto t1 = run_grid(g, dir);
  CHECK(t1.records.size() == 4);
  const auto* row = t1.find(g.cells().front(), "varsort");
  REQUIRE(row != nullptr);
  CHECK(row->seeds == 2);
  CHECK(row->accuracy * 2 == doctest::Approx(static_cast<double>(row->correct)));
  const std::string csv1 = slurp(dir / "records.csv");
  const std::string sum1 = slurp(dir / "summary.csv");
  CHECK(csv1.rfind("mechanism,noise,mediators,n,seed,method,", 0) == 0);

  // Resume from checkpoints.
  const auto t2 = run_grid(g, dir);
  CHECK(slurp(dir / "records.csv") == csv1);
  CHECK(slurp(dir / "summary.csv") == sum1);
  CHECK(t2.records.size() == 4);

  // Fresh rerun into a new directory gives the same bytes.
  const fs::path dir2 = scratch_dir("grid2");
  run_grid(g, dir2, {2, false, true});
  CHECK(slurp(dir2 / "records.csv") == csv1);
  CHECK(slurp(dir2 / "summary.csv") == sum1);
  CHECK(slurp(dir / "results.json").find("runtime_seconds") != std::string::npos);
  CHECK(csv1.find("runtime") == std::string::npos);
}

TEST_CASE("bidd grid unit on a tiny model") {
  ExperimentGrid g = tiny_grid();
  g.methods = {Method::VarSort, Method::Bidd};
  g.bidd.oversample = 1;
  g.seeds = {3};
  const auto t = run_grid(g, scratch_dir("grid_fail"));
  REQUIRE(t.records.size() == 2);
  CHECK(t.records[1].method == "bidd_total");
  CHECK(t.records[1].verdict.has_value());
}

TEST_CASE("ablations") {
  ExperimentGrid g = tiny_grid();
  g.seeds = {5};
  const auto est = run_ablation(AblationKind::MIEstimator, g, scratch_dir("abl_est"));
  CHECK(est.records.size() == 12);
  CHECK(est.rows.size() == 12);
  CHECK(est.rows.front().method == "bidd_total[hsic(scale=0.5),voting]");
  const auto cond = run_ablation(AblationKind::Unconditional, g, scratch_dir("abl_cond"));
  REQUIRE(cond.records.size() == 2);
  CHECK(cond.records[0].method == "bidd_total_conditional");
  CHECK(cond.records[1].method == "bidd_total_unconditional");
  CHECK(parse_ablation("estimator") == AblationKind::MIEstimator);
  CHECK_THROWS_AS(parse_ablation("dropout"), ConfigError);
}
