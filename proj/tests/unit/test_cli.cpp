#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "geoagg/commands.hpp"
#include "geoagg/config.hpp"
#include "geoagg/errors.hpp"
#include "geoagg/eval/results_io.hpp"
#include "geoagg/raster_io.hpp"
#include "helpers.hpp"

using namespace geoagg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json small_run(const fs::path& out) {
  auto j = nlohmann::json::parse(R"({
    "version": 1,
    "dataset": {"generator": {"rows": 8, "cols": 8, "n_days": 90, "years": [2003, 2004, 2005]}, "seed": 4},
    "methods": ["SR", "FL2", "SGP", "GPESA", {"family": "WR", "R": [1]}],
    "seeds": [1, 2],
    "folds": {"years": [2004]},
    "gp": {"population": 16, "generations": 3, "runs": 1, "tune_iterations": 3},
    "wrapper": {"iterations": 10, "restarts": 2}
  })");
  j["output"] = out.string();
  return j;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("run config json round trip") {
  test::TempDir dir("cfg");
  const auto c = run_config_from_json(small_run(dir.path() / "out"), dir.path());
  CHECK(c.methods.size() == 5);
  CHECK(c.methods[4].label() == "WR1");
  CHECK(c.methods[4].seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(c.settings.gp.population == 16);
  CHECK(c.settings.wrapper_restarts == 2);
  CHECK(c.settings.fold_years == std::vector<Year>{2004});
  const auto again = run_config_from_json(run_config_to_json(c), dir.path());
  CHECK(run_config_to_json(again) == run_config_to_json(c));
  CHECK(config_hash(again) == config_hash(c));
  auto other = c;
  other.settings.gp.population = 17;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("bad run configs") {
  auto j = small_run("out");
  j["version"] = 2;
  CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
  j = small_run("out");
  j["methods"] = nlohmann::json::array({"FR"});
  CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
  j = small_run("out");
  j["aggregation"] = "magic";
  CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
  j = small_run("out");
  j["gp"]["tune_scope"] = "both";
  CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
  j = small_run("out");
  j.erase("dataset");
  CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
}

TEST_CASE("full-size shape") {
  auto c = run_config_from_json(small_run("out"));
  apply_paper_shape(c);
  CHECK(c.settings.gp.population == 1000);
  CHECK(c.settings.gp.generations == 1000);
  CHECK(c.settings.gp.runs == 30);
  CHECK(c.settings.wrapper_restarts == 30);
  CHECK(c.generator->rows == 113);
}

}  // TEST_SUITE config

TEST_SUITE("cli") {

TEST_CASE("generate is deterministic and refuses to clobber") {
  test::TempDir dir("gen");
  std::ostringstream log;
  cli::GenerateOptions o;
  o.seed = 3;
  o.out = dir.path() / "a";
  CHECK(cli::run_command([&] { return cli::cmd_generate(o, log); }, log) == cli::kOk);
  const auto raster = load_raster(o.out / cli::kRasterFile);
  CHECK(raster.n_days() == 400);
  CHECK(fs::file_size(o.out / cli::kRasterFile) == 4 + 1 + 16 + 32 + 4 * 400 + 4ull * 400 * 32 * 32 * 3);
  CHECK(fs::exists(o.out / cli::kTruthFile));
  CHECK(cli::run_command([&] { return cli::cmd_generate(o, log); }, log) != cli::kOk);
  cli::GenerateOptions o2 = o;
  o2.out = dir.path() / "b";
  CHECK(cli::cmd_generate(o2, log) == cli::kOk);
  CHECK(slurp(o.out / cli::kRasterFile) == slurp(o2.out / cli::kRasterFile));
  CHECK(slurp(o.out / cli::kResponseFile) == slurp(o2.out / cli::kResponseFile));
  o.overwrite = true;
  o.seed = 4;
  CHECK(cli::cmd_generate(o, log) == cli::kOk);
  CHECK(slurp(o.out / cli::kRasterFile) != slurp(o2.out / cli::kRasterFile));
}

TEST_CASE("run, stats and importance end to end") {
  test::TempDir dir("run");
  const fs::path cfg = dir.path() / "run.json";
  std::ofstream(cfg) << small_run(dir.path() / "out").dump(2);
  std::ostringstream log;
  cli::RunOptions r;
  r.config = cfg;
  REQUIRE(cli::run_command([&] { return cli::cmd_run(r, log); }, log) == cli::kOk);
  const fs::path out = dir.path() / "out";
  for (const char* f : {"results.csv", "predictions.csv", "timings.csv", "config.json", "manifest.json"})
    CHECK(fs::exists(out / f));
  const auto rows = read_results_csv(out / "results.csv");
  // SR and FL2 run once, the seeded families twice.
  CHECK(rows.size() == 1 + 1 + 2 + 2 + 2);
  CHECK(fs::exists(out / "artifacts" / (artifact_stem("GPESA", 2004, 2) + ".expr")));

  // Existing output is refused without --overwrite.
  CHECK(cli::run_command([&] { return cli::cmd_run(r, log); }, log) != cli::kOk);

  cli::StatsOptions s;
  s.results = out;
  s.method_a = "GPESA";
  s.method_b = "SR";
  CHECK(cli::run_command([&] { return cli::cmd_stats(s, log); }, log) == cli::kOk);
  CHECK(fs::exists(out / "stats_GPESA_vs_SR.csv"));
  s.method_b = "FR9";
  CHECK(cli::run_command([&] { return cli::cmd_stats(s, log); }, log) == cli::kDataError);

  for (const char* m : {"FL2", "GPESA", "WR1", "SGP"}) {
    cli::ImportanceOptions im;
    im.results = out;
    im.method = m;
    CHECK(cli::run_command([&] { return cli::cmd_importance(im, log); }, log) == cli::kOk);
    CHECK(fs::exists(out / (std::string("importance_") + m + "_var0.csv")));
  }
}

TEST_CASE("config errors map to exit code 2") {
  test::TempDir dir("bad");
  std::ofstream(dir.path() / "bad.json") << R"({"version": 1, "methods": []})";
  std::ostringstream log;
  cli::RunOptions r;
  r.config = dir.path() / "bad.json";
  CHECK(cli::run_command([&] { return cli::cmd_run(r, log); }, log) == cli::kConfigError);
  r.config = dir.path() / "missing.json";
  CHECK(cli::run_command([&] { return cli::cmd_run(r, log); }, log) == cli::kConfigError);
}

TEST_CASE("missing data files map to exit code 3") {
  test::TempDir dir("nodata");
  std::ofstream(dir.path() / "run.json") << R"({"version": 1, "dataset": {"raster": "x.gevr", "response": "y.csv"},
    "methods": ["SR"], "output": "out"})";
  std::ostringstream log;
  cli::RunOptions r;
  r.config = dir.path() / "run.json";
  CHECK(cli::run_command([&] { return cli::cmd_run(r, log); }, log) == cli::kDataError);
}

TEST_CASE("every fold gets a stats row; filter heatmaps have grid shape; reruns are idempotent") {
  test::TempDir dir("fr15");
  auto j = nlohmann::json::parse(R"({
    "version": 1,
    "dataset": {"generator": {"rows": 16, "cols": 16, "n_days": 90, "years": [2003, 2004, 2005]}, "seed": 8},
    "methods": ["SR", "FR15"]
  })");
  j["output"] = (dir.path() / "out").string();
  const fs::path cfg = dir.path() / "run.json";
  std::ofstream(cfg) << j.dump(2);
  std::ostringstream log;
  cli::RunOptions r;
  r.config = cfg;
  REQUIRE(cli::run_command([&] { return cli::cmd_run(r, log); }, log) == cli::kOk);
  const fs::path out = dir.path() / "out";
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "best_by_year.csv"));
  const std::string first = slurp(out / "results.csv");

  cli::StatsOptions s;
  s.results = out;
  s.method_a = "FR15";
  s.method_b = "SR";
  REQUIRE(cli::run_command([&] { return cli::cmd_stats(s, log); }, log) == cli::kOk);
  std::ifstream st(out / "stats_FR15_vs_SR.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(st, line)) ++lines;
  CHECK(lines == 1 + 3);

  cli::ImportanceOptions im;
  im.results = out;
  im.method = "FR15";
  REQUIRE(cli::run_command([&] { return cli::cmd_importance(im, log); }, log) == cli::kOk);
  for (int v = 0; v < 3; ++v) {
    std::ifstream h(out / ("importance_FR15_var" + std::to_string(v) + ".csv"));
    REQUIRE(h);
    std::size_t rows = 0;
    while (std::getline(h, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 15);
    }
    CHECK(rows == 16);
  }
  CHECK_FALSE(fs::exists(out / "importance_FR15_var3.csv"));

  r.overwrite = true;
  REQUIRE(cli::run_command([&] { return cli::cmd_run(r, log); }, log) == cli::kOk);
  CHECK(slurp(out / "results.csv") == first);
}

}  // TEST_SUITE cli
