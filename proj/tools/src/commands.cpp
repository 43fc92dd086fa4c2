#include "geoagg/commands.hpp"

#include <fstream>
#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "geoagg/config.hpp"
#include "geoagg/eval/experiment.hpp"
#include "geoagg/eval/importance.hpp"
#include "geoagg/eval/results_io.hpp"
#include "geoagg/raster_io.hpp"
#include "geoagg/synthetic.hpp"

namespace geoagg::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Creates `dir` and clears the named entries when overwriting; refuses to
// clobber them otherwise.
void prepare_outputs(const fs::path& dir, std::initializer_list<fs::path> entries, bool overwrite) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
  for (const auto& e : entries) {
    const fs::path p = dir / e;
    if (!fs::exists(p)) continue;
    if (!overwrite) throw ConfigError(p.string() + " exists; pass --overwrite to replace it");
    fs::remove_all(p);
  }
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json grid_json(const RasterSeries& r) {
  const GeoGrid& g = r.grid();
  return {{"rows", g.rows()},         {"cols", g.cols()},         {"lat0", g.lat0()},      {"lon0", g.lon0()},
          {"lat_step", g.lat_step()}, {"lon_step", g.lon_step()}, {"n_vars", r.n_vars()}, {"n_days", r.n_days()}};
}

}  // namespace

int cmd_generate(const GenerateOptions& options, std::ostream& log) {
  SyntheticConfig config;
  if (options.paper_shape) config = paper_shape_config();
  if (options.config) {
    std::ifstream in(*options.config);
    if (!in) throw ConfigError("cannot open generator config " + options.config->string());
    try {
      json j = json::parse(in);
      if (j.contains("generator")) j = j.at("generator");
      config = j.get<SyntheticConfig>();
    } catch (const json::exception& e) {
      throw ConfigError(options.config->string() + ": " + e.what());
    }
    if (options.paper_shape) log << "note: --paper-shape ignored, explicit generator config given\n";
  }
  const SyntheticDataset ds = generate_synthetic(config, options.seed);
  prepare_outputs(options.out, {kRasterFile, kResponseFile, kTruthFile}, options.overwrite);
  save_raster(ds.raster, options.out / kRasterFile);
  save_response(ds.response, options.out / kResponseFile);
  json truth = ds.truth;
  truth["seed"] = options.seed;
  truth["generator"] = config;
  write_json(truth, options.out / kTruthFile);
  log << "wrote " << ds.raster.n_days() << " days of " << ds.raster.grid().rows() << "x" << ds.raster.grid().cols()
      << "x" << ds.raster.n_vars() << " to " << options.out.string() << '\n';
  return kOk;
}

int cmd_run(const RunOptions& options, std::ostream& log) {
  RunConfig config = load_run_config(options.config);
  if (options.paper_shape) apply_paper_shape(config);
  if (options.out) config.output = *options.out;
  if (options.jobs) config.settings.jobs = *options.jobs;
  if (options.seed) {
    config.seeds = {*options.seed};
    for (auto& m : config.methods) m.seeds = config.seeds;
  }
  validate_run_config(config);

  RasterSeries raster;
  ResponseSeries response;
  if (config.generator) {
    SyntheticDataset ds = generate_synthetic(*config.generator, config.generator_seed);
    raster = std::move(ds.raster);
    response = std::move(ds.response);
  } else {
    raster = load_raster(*config.raster_path);
    response = load_response(*config.response_path);
  }
  check_paired(raster, response);
  const auto folds = make_folds(raster.day_year());

  const fs::path out = config.output;
  prepare_outputs(out, {"results.csv", "predictions.csv", "timings.csv", "manifest.json", "config.json", "artifacts",
                        "summary.csv", "best_by_year.csv"},
                  options.overwrite);

  const ExperimentResult result = run_experiment(config.methods, raster, response, folds, config.settings);
  const std::uint64_t hash = config_hash(config);

  write_results_csv(result.cells, out / "results.csv", config.record_timing);
  write_predictions_csv(result.cells, out / "predictions.csv");
  write_timings_csv(result.cells, out / "timings.csv");
  const auto rows = read_results_csv(out / "results.csv");
  write_summary_csv(summarize_results(rows), out / "summary.csv");
  write_best_by_year_csv(best_by_year(rows), out / "best_by_year.csv");
  if (config.write_artifacts) {
    fs::create_directories(out / "artifacts");
    for (const auto& c : result.cells) write_cell_artifacts(c, out / "artifacts", hash);
  }
  write_json(run_config_to_json(config), out / "config.json");

  json manifest;
  manifest["config_hash"] = hash;
  manifest["grid"] = grid_json(raster);
  manifest["methods"] = json::array();
  for (const auto& m : config.methods) manifest["methods"].push_back(m.label());
  manifest["folds"] = json::array();
  for (const auto& f : folds)
    if (config.settings.fold_years.empty() ||
        std::find(config.settings.fold_years.begin(), config.settings.fold_years.end(), f.test_year) !=
            config.settings.fold_years.end())
      manifest["folds"].push_back(f.test_year);
  manifest["cells"] = result.cells.size();
  manifest["failures"] = json::array();
  for (const auto& c : result.cells)
    if (!c.ok)
      manifest["failures"].push_back({{"method", c.method}, {"fold_year", c.fold_year}, {"seed", c.seed}, {"error", c.error}});
  write_json(manifest, out / "manifest.json");

  log << "ran " << result.cells.size() << " cells, " << result.failures() << " failed; results in " << out.string()
      << '\n';
  for (const auto& c : result.cells)
    if (!c.ok) log << "  failed " << c.method << " " << c.fold_year << " seed " << c.seed << ": " << c.error << '\n';
  return result.failures() ? kPartialFailure : kOk;
}

int cmd_stats(const StatsOptions& options, std::ostream& log) {
  const auto predictions = read_predictions_csv(options.results / "predictions.csv");
  const auto rows = compare_methods(predictions, options.method_a, options.method_b);
  const fs::path path =
      options.out.value_or(options.results / ("stats_" + options.method_a + "_vs_" + options.method_b + ".csv"));
  if (fs::exists(path) && !options.overwrite) throw ConfigError(path.string() + " exists; pass --overwrite to replace it");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_stats_csv(rows, path);
  std::size_t wins = 0;
  for (const auto& r : rows) wins += r.winner == options.method_a;
  log << options.method_a << " significantly better than " << options.method_b << " in " << wins << " of "
      << rows.size() << " years; wrote " << path.string() << '\n';
  return kOk;
}

int cmd_importance(const ImportanceOptions& options, std::ostream& log) {
  const MethodSpec spec = parse_method_label(options.method);
  const json manifest = read_json(options.results / "manifest.json");
  GeoGrid grid;
  std::size_t n_vars = 0;
  try {
    const json& g = manifest.at("grid");
    grid = GeoGrid(g.at("rows").get<std::size_t>(), g.at("cols").get<std::size_t>(), g.at("lat0").get<double>(),
                   g.at("lon0").get<double>(), g.at("lat_step").get<double>(), g.at("lon_step").get<double>());
    n_vars = g.at("n_vars").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError("manifest.json: " + std::string(e.what()));
  }

  const fs::path art = options.results / "artifacts";
  std::vector<ResultRow> cells;
  for (auto& r : read_results_csv(options.results / "results.csv"))
    if (r.method == spec.label()) cells.push_back(std::move(r));
  if (cells.empty()) throw InvalidInput("no results for method " + spec.label());

  std::vector<ImportanceMap> maps;
  if (family_is_gp(spec.family)) {
    std::vector<gp::GpIndividual> front;
    std::vector<CircleFeature> defs;
    for (const auto& c : cells) {
      const std::string stem = artifact_stem(spec.label(), c.fold_year, c.seed);
      auto f = load_front_csv(art / (stem + ".front.csv"));
      if (spec.family != Family::GPESA) {
        // Feature terminals index the cell's own column list.
        auto d = load_circles(art / (stem + ".circles.csv"));
        if (defs.empty()) defs = d;
        else if (d != defs) throw FormatError("feature lists differ between cells of " + spec.label());
      }
      front.insert(front.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
    }
    maps = importance_gp(front, defs, grid, n_vars);
  } else {
    std::vector<LinearModel> models;
    std::vector<std::vector<CircleFeature>> features;
    for (const auto& c : cells) {
      const std::string stem = artifact_stem(spec.label(), c.fold_year, c.seed);
      models.push_back(load_linear_model(art / (stem + ".model.csv")));
      features.push_back(load_circles(art / (stem + ".circles.csv")));
    }
    maps = importance_linear(models, features, grid, n_vars);
  }

  const fs::path out = options.out.value_or(options.results);
  fs::create_directories(out);
  for (const auto& m : maps) {
    const fs::path p = out / ("importance_" + spec.label() + "_var" + std::to_string(m.var) + ".csv");
    if (fs::exists(p) && !options.overwrite) throw ConfigError(p.string() + " exists; pass --overwrite to replace it");
    save_heatmap_csv(m, p);
  }
  log << "wrote " << maps.size() << " heatmaps for " << spec.label() << " from " << cells.size() << " cells\n";
  return kOk;
}

}  // namespace geoagg::cli
