#include <iostream>

#include "CLI11.hpp"
#include "geoagg/commands.hpp"

using namespace geoagg::cli;

int main(int argc, char** argv) {
  CLI::App app{"geoagg: evolved spatial aggregation for regional regression"};
  app.require_subcommand(1);

  bool overwrite = false;
  bool paper_shape = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config, out;
  std::optional<std::size_t> jobs;
  auto common = [&](CLI::App* sub) {
    sub->add_flag("--overwrite", overwrite, "Replace existing outputs");
    sub->add_flag("--paper-shape", paper_shape, "Use full-size grid and search parameters");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--config", config, "JSON configuration file");
    sub->add_option("--out", out, "Output location");
    sub->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic raster, response and planted truth");
  common(gen);

  auto* run = app.add_subcommand("run", "Run an experiment described by --config");
  common(run);

  std::string results, method;
  std::vector<std::string> pair;
  auto* stats = app.add_subcommand("stats", "Yearly signed-rank tests between two methods");
  common(stats);
  stats->add_option("--results", results, "Run output directory")->required();
  stats->add_option("--pair", pair, "Two method labels, e.g. GPESA SL")->expected(2);

  auto* imp = app.add_subcommand("importance", "Export per-variable importance heatmaps");
  common(imp);
  imp->add_option("--results", results, "Run output directory")->required();
  imp->add_option("--method", method, "Method label, e.g. FR15")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (gen->parsed()) {
    GenerateOptions o;
    if (config) o.config = *config;
    if (seed) o.seed = *seed;
    if (out) o.out = *out;
    o.overwrite = overwrite;
    o.paper_shape = paper_shape;
    return run_command([&] { return cmd_generate(o, std::cout); }, std::cerr);
  }
  if (run->parsed()) {
    if (!config) {
      std::cerr << "config error: run requires --config\n";
      return kConfigError;
    }
    RunOptions o;
    o.config = *config;
    if (out) o.out = *out;
    o.seed = seed;
    o.jobs = jobs;
    o.overwrite = overwrite;
    o.paper_shape = paper_shape;
    return run_command([&] { return cmd_run(o, std::cout); }, std::cerr);
  }
  if (stats->parsed()) {
    StatsOptions o;
    o.results = results;
    if (pair.size() == 2) {
      o.method_a = pair[0];
      o.method_b = pair[1];
    }
    if (out) o.out = *out;
    o.overwrite = overwrite;
    return run_command([&] { return cmd_stats(o, std::cout); }, std::cerr);
  }
  ImportanceOptions o;
  o.results = results;
  o.method = method;
  if (out) o.out = *out;
  o.overwrite = overwrite;
  return run_command([&] { return cmd_importance(o, std::cout); }, std::cerr);
}
