#include "geoagg/config.hpp"

#include <fstream>
#include <set>

#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void read_gp(const json& j, gp::GpConfig& g) {
  g.population = j.value("population", g.population);
  g.generations = j.value("generations", g.generations);
  g.runs = j.value("runs", g.runs);
  g.p_crossover = j.value("p_crossover", g.p_crossover);
  g.p_mutation = j.value("p_mutation", g.p_mutation);
  g.init_min_height = j.value("init_min_height", g.init_min_height);
  g.init_max_height = j.value("init_max_height", g.init_max_height);
  g.mutation_max_height = j.value("mutation_max_height", g.mutation_max_height);
  g.limits.max_height = j.value("max_height", g.limits.max_height);
  g.limits.max_size = j.value("max_size", g.limits.max_size);
  g.elitist = j.value("elitist", g.elitist);
  g.parent_tournament = j.value("parent_tournament", g.parent_tournament);
  if (g.parent_tournament < 1) throw ConfigError("gp.parent_tournament must be >= 1");
  g.tune_probability = j.value("tune_probability", g.tune_probability);
  const std::string scope = j.value("tune_scope", std::string(g.tune_scope == gp::TuneScope::PerPopulation ? "population" : "individual"));
  if (scope == "population") g.tune_scope = gp::TuneScope::PerPopulation;
  else if (scope == "individual") g.tune_scope = gp::TuneScope::PerIndividual;
  else throw ConfigError("gp.tune_scope must be `population` or `individual`");
  g.tune_iterations = j.value("tune_iterations", g.tune_iterations);
  g.bootstrap_resamples = j.value("bootstrap_resamples", g.bootstrap_resamples);
  g.bootstrap_fraction = j.value("bootstrap_fraction", g.bootstrap_fraction);
  if (g.population < 1 || g.runs < 1) throw ConfigError("gp.population and gp.runs must be >= 1");
  if (g.init_min_height > g.init_max_height) throw ConfigError("gp.init_min_height exceeds gp.init_max_height");
  for (double p : {g.p_crossover, g.p_mutation, g.tune_probability})
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("gp probabilities must lie in [0, 1]");
  if (!(g.bootstrap_fraction > 0.0)) throw ConfigError("gp.bootstrap_fraction must be positive");
}

json write_gp(const gp::GpConfig& g) {
  return {{"population", g.population},
          {"generations", g.generations},
          {"runs", g.runs},
          {"p_crossover", g.p_crossover},
          {"p_mutation", g.p_mutation},
          {"init_min_height", g.init_min_height},
          {"init_max_height", g.init_max_height},
          {"mutation_max_height", g.mutation_max_height},
          {"max_height", g.limits.max_height},
          {"max_size", g.limits.max_size},
          {"elitist", g.elitist},
          {"parent_tournament", g.parent_tournament},
          {"tune_probability", g.tune_probability},
          {"tune_scope", g.tune_scope == gp::TuneScope::PerPopulation ? "population" : "individual"},
          {"tune_iterations", g.tune_iterations},
          {"bootstrap_resamples", g.bootstrap_resamples},
          {"bootstrap_fraction", g.bootstrap_fraction}};
}

std::vector<MethodSpec> read_methods(const json& j, const std::vector<std::uint64_t>& seeds) {
  if (!j.is_array()) throw ConfigError("methods must be an array");
  std::vector<MethodSpec> out;
  for (const auto& m : j) {
    if (m.is_string()) {
      out.push_back(parse_method_label(m.get<std::string>()));
    } else if (m.is_object()) {
      const Family fam = family_from_name(m.at("family").get<std::string>());
      std::vector<std::size_t> Rs;
      if (m.contains("R")) {
        if (m.at("R").is_array()) Rs = m.at("R").get<std::vector<std::size_t>>();
        else Rs.push_back(m.at("R").get<std::size_t>());
      } else {
        Rs.push_back(0);
      }
      for (std::size_t R : Rs) {
        MethodSpec s;
        s.family = fam;
        s.R = R;
        out.push_back(s);
      }
    } else {
      throw ConfigError("method entries must be labels or objects");
    }
  }
  std::set<std::string> seen;
  for (auto& s : out) {
    s.seeds = seeds;
    s.validate();
    if (!seen.insert(s.label()).second) throw ConfigError("duplicate method " + s.label());
  }
  return out;
}

}  // namespace

ExperimentSettings RunConfig::desk_settings() {
  ExperimentSettings s;
  s.gp.population = 200;
  s.gp.generations = 100;
  s.gp.runs = 5;
  s.wrapper.iterations = 1000;
  s.wrapper_restarts = 5;
  return s;
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    const int version = j.value("version", 0);
    if (version != kRunConfigVersion)
      throw ConfigError("unsupported run config version " + std::to_string(version) + " (expected " +
                        std::to_string(kRunConfigVersion) + ")");
    RunConfig c;
    const json& ds = j.at("dataset");
    if (ds.contains("generator")) {
      c.generator = ds.at("generator").get<SyntheticConfig>();
      c.generator_seed = ds.value("seed", c.generator_seed);
    } else {
      c.raster_path = resolve(ds.at("raster").get<std::string>(), base_dir);
      c.response_path = resolve(ds.at("response").get<std::string>(), base_dir);
    }
    c.seeds = j.value("seeds", c.seeds);
    if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
    c.methods = read_methods(j.at("methods"), c.seeds);
    if (j.contains("folds")) c.settings.fold_years = j.at("folds").value("years", std::vector<Year>{});
    if (j.contains("output")) c.output = resolve(j.at("output").get<std::string>(), base_dir);
    c.settings.jobs = j.value("jobs", c.settings.jobs);
    c.record_timing = j.value("record_timing", c.record_timing);
    c.write_artifacts = j.value("artifacts", c.write_artifacts);
    const std::string agg = j.value("aggregation", std::string("indexed"));
    if (agg == "indexed") c.settings.aggregation = AggregationEngine::Strategy::Indexed;
    else if (agg == "naive") c.settings.aggregation = AggregationEngine::Strategy::Naive;
    else throw ConfigError("aggregation must be `indexed` or `naive`");
    if (j.contains("gp")) read_gp(j.at("gp"), c.settings.gp);
    if (j.contains("wrapper")) {
      const json& w = j.at("wrapper");
      c.settings.wrapper.iterations = w.value("iterations", c.settings.wrapper.iterations);
      c.settings.wrapper.subset_fraction = w.value("subset_fraction", c.settings.wrapper.subset_fraction);
      c.settings.wrapper_restarts = w.value("restarts", c.settings.wrapper_restarts);
      const std::string acc = w.value("acceptance", std::string("paired"));
      if (acc == "paired") c.settings.wrapper.acceptance = WrapperAcceptance::Paired;
      else if (acc == "running_best") c.settings.wrapper.acceptance = WrapperAcceptance::RunningBest;
      else throw ConfigError("wrapper.acceptance must be `paired` or `running_best`");
      if (c.settings.wrapper_restarts < 1) throw ConfigError("wrapper.restarts must be >= 1");
      if (!(c.settings.wrapper.subset_fraction > 0.0 && c.settings.wrapper.subset_fraction < 1.0))
        throw ConfigError("wrapper.subset_fraction must lie in (0, 1)");
    }
    if (j.contains("linear")) {
      const json& l = j.at("linear");
      c.settings.cv.n_splits = l.value("cv_splits", c.settings.cv.n_splits);
      c.settings.cv.penalty_grid = l.value("penalty_grid", c.settings.cv.penalty_grid);
      c.settings.lasso.tolerance = l.value("lasso_tolerance", c.settings.lasso.tolerance);
      c.settings.lasso.max_sweeps = l.value("lasso_max_sweeps", c.settings.lasso.max_sweeps);
      c.settings.wrapper.cv = c.settings.cv;
      c.settings.wrapper.lasso = c.settings.lasso;
      if (c.settings.cv.n_splits < 2) throw ConfigError("linear.cv_splits must be >= 2");
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

json run_config_to_json(const RunConfig& c) {
  json j;
  j["version"] = kRunConfigVersion;
  if (c.generator) {
    j["dataset"] = {{"generator", *c.generator}, {"seed", c.generator_seed}};
  } else {
    j["dataset"] = {{"raster", c.raster_path.value_or("").string()}, {"response", c.response_path.value_or("").string()}};
  }
  auto methods = json::array();
  for (const auto& m : c.methods) methods.push_back(m.label());
  j["methods"] = methods;
  j["seeds"] = c.seeds;
  j["folds"] = {{"years", c.settings.fold_years}};
  j["output"] = c.output.string();
  j["jobs"] = c.settings.jobs;
  j["record_timing"] = c.record_timing;
  j["artifacts"] = c.write_artifacts;
  j["aggregation"] = c.settings.aggregation == AggregationEngine::Strategy::Indexed ? "indexed" : "naive";
  j["gp"] = write_gp(c.settings.gp);
  j["wrapper"] = {{"iterations", c.settings.wrapper.iterations},
                  {"subset_fraction", c.settings.wrapper.subset_fraction},
                  {"restarts", c.settings.wrapper_restarts},
                  {"acceptance", c.settings.wrapper.acceptance == WrapperAcceptance::Paired ? "paired" : "running_best"}};
  j["linear"] = {{"cv_splits", c.settings.cv.n_splits},
                 {"penalty_grid", c.settings.cv.penalty_grid},
                 {"lasso_tolerance", c.settings.lasso.tolerance},
                 {"lasso_max_sweeps", c.settings.lasso.max_sweeps}};
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

void validate_run_config(const RunConfig& c) {
  if (c.methods.empty()) throw ConfigError("at least one method is required");
  if (!c.generator) {
    for (const auto& p : {c.raster_path, c.response_path}) {
      if (!p) throw ConfigError("dataset needs both raster and response paths, or a generator");
      // The config is well formed; the data it points at is missing.
      if (!std::filesystem::exists(*p)) throw FormatError("dataset file not found: " + p->string());
    }
  }
}

void apply_paper_shape(RunConfig& c) {
  if (c.generator) *c.generator = paper_shape_config();
  const auto full = gp::paper_gp_config();
  c.settings.gp.population = full.population;
  c.settings.gp.generations = full.generations;
  c.settings.gp.runs = full.runs;
  c.settings.wrapper.iterations = 1000;
  c.settings.wrapper_restarts = 30;
  std::vector<MethodSpec> methods;
  std::set<Family> expanded;
  for (const auto& m : c.methods) {
    if (!family_needs_R(m.family)) {
      methods.push_back(m);
      continue;
    }
    if (!expanded.insert(m.family).second) continue;
    const bool wrapper = m.family == Family::WR || m.family == Family::WL;
    for (std::size_t R = 1; R <= (wrapper ? 4u : 20u); ++R) {
      MethodSpec s = m;
      s.R = R;
      methods.push_back(s);
    }
  }
  c.methods = std::move(methods);
}

std::uint64_t config_hash(const RunConfig& c) {
  const std::string text = run_config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace geoagg
