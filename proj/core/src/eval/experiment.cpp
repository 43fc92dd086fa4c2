#include "geoagg/eval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <thread>

#include "geoagg/design.hpp"
#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

struct FamilyInfo {
  Family family;
  const char* name;
};
constexpr FamilyInfo kFamilies[] = {
    {Family::SR, "SR"}, {Family::SL, "SL"}, {Family::SGP, "SGP"}, {Family::FR, "FR"},       {Family::FL, "FL"},
    {Family::FGP, "FGP"}, {Family::WR, "WR"}, {Family::WL, "WL"}, {Family::GPESA, "GPESA"},
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Feature matrices shared by the cells of one fold.
struct FoldContext {
  const FoldSpec* fold = nullptr;
  const AggregationEngine* engine = nullptr;
  std::span<const double> response;
  std::optional<FeatureMatrix> units;
  std::vector<CircleFeature> unit_defs;
  std::map<std::size_t, std::pair<std::vector<CircleFeature>, FeatureMatrix>> filters;
  std::map<std::size_t, std::string> filter_errors;  // R values whose lattice could not be built

  const std::pair<std::vector<CircleFeature>, FeatureMatrix>& filter(std::size_t R) const {
    if (auto e = filter_errors.find(R); e != filter_errors.end()) throw InvalidInput(e->second);
    return filters.at(R);
  }
};

void finish_predictions(CellResult& cell, std::vector<double> predicted, std::span<const double> response) {
  cell.predicted = std::move(predicted);
  cell.actual.resize(cell.test_days.size());
  for (std::size_t i = 0; i < cell.test_days.size(); ++i) cell.actual[i] = response[cell.test_days[i]];
  cell.test_mae = mae(cell.predicted, cell.actual);
}

void run_linear(CellResult& cell, const MethodSpec& spec, const FoldContext& ctx, const std::vector<CircleFeature>& defs,
                const FeatureMatrix& features, const ExperimentSettings& settings) {
  const auto train = std::span<const DayIndex>(ctx.fold->train_days);
  const ColumnScaling scaling = fit_column_scaling(features, train);
  const Matrix X = design_matrix(features, train, scaling);
  const Vector y = gather_vector(ctx.response, train);
  CvPlan plan = settings.cv;
  const Penalty kind = family_penalty(spec.family);
  if (plan.penalty_grid.empty()) plan.penalty_grid = default_penalty_grid(X, y, kind);
  CvSelection sel = select_penalty_cv(X, y, kind, plan, settings.lasso);
  cell.train_err = mae(predict(sel.model, X), y);
  const Vector p = predict(sel.model, design_matrix(features, cell.test_days, scaling));
  finish_predictions(cell, {p.data(), p.data() + p.size()}, ctx.response);
  cell.circles = defs;
  cell.linear = std::move(sel.model);
}

void run_wrapper(CellResult& cell, const MethodSpec& spec, const FoldContext& ctx, const ExperimentSettings& settings) {
  const WrapperProblem problem{ctx.engine, ctx.fold->train_days, ctx.response};
  const auto seeds = restart_seeds(cell.seed, settings.wrapper_restarts);
  WrapperResult res = multi_restart(family_penalty(spec.family), spec.R, problem, settings.wrapper, seeds);
  cell.train_err = res.training_mae;
  finish_predictions(cell, res.predict(cell.test_days), ctx.response);
  cell.circles = res.features;
  cell.linear = std::move(res.model);
}

void run_gp(CellResult& cell, const MethodSpec& spec, const FoldContext& ctx, const FeatureMatrix* features,
            const std::vector<CircleFeature>* defs, const ExperimentSettings& settings) {
  gp::GpProblem problem;
  problem.mode = spec.family == Family::GPESA ? gp::GpMode::Gpesa
                 : spec.family == Family::SGP ? gp::GpMode::Standard
                                              : gp::GpMode::Filtered;
  problem.features = features;
  problem.engine = ctx.engine;
  problem.train_days = ctx.fold->train_days;
  problem.response = ctx.response;
  gp::EvolutionResult res = gp::run_evolution(problem, settings.gp, cell.seed);
  cell.train_err = res.best.error;
  finish_predictions(cell, res.model.predict(problem.context(), cell.test_days), ctx.response);
  if (defs) cell.circles = *defs;
  cell.gp_model = std::move(res.model);
  cell.front = std::move(res.front);
  cell.gp_evaluations = res.log.evaluations;
  cell.gp_evaluation_seconds = res.log.evaluation_seconds;
}

void run_cell(CellResult& cell, const MethodSpec& spec, const FoldContext& ctx, const ExperimentSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  try {
    cell.test_days = ctx.fold->test_days;
    cell.train_tag = fold_tag(ctx.fold->train_days);
    cell.scaling_provenance = ctx.engine->cube().provenance();
    if (cell.scaling_provenance != cell.train_tag)
      throw std::logic_error("scaling parameters were not fit on this fold's training days");
    switch (spec.family) {
      case Family::SR:
      case Family::SL: run_linear(cell, spec, ctx, ctx.unit_defs, *ctx.units, settings); break;
      case Family::FR:
      case Family::FL: {
        const auto& f = ctx.filter(spec.R);
        run_linear(cell, spec, ctx, f.first, f.second, settings);
        break;
      }
      case Family::WR:
      case Family::WL: run_wrapper(cell, spec, ctx, settings); break;
      case Family::SGP: run_gp(cell, spec, ctx, &*ctx.units, &ctx.unit_defs, settings); break;
      case Family::FGP: {
        const auto& f = ctx.filter(spec.R);
        run_gp(cell, spec, ctx, &f.second, &f.first, settings);
        break;
      }
      case Family::GPESA: run_gp(cell, spec, ctx, nullptr, nullptr, settings); break;
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const char* family_name(Family f) noexcept {
  for (const auto& info : kFamilies)
    if (info.family == f) return info.name;
  return "?";
}

Family family_from_name(const std::string& name) {
  for (const auto& info : kFamilies)
    if (name == info.name) return info.family;
  throw ConfigError("unknown method family `" + name + "`");
}

bool family_needs_R(Family f) noexcept {
  return f == Family::FR || f == Family::FL || f == Family::FGP || f == Family::WR || f == Family::WL;
}

bool family_is_gp(Family f) noexcept { return f == Family::SGP || f == Family::FGP || f == Family::GPESA; }

bool family_is_seeded(Family f) noexcept { return family_is_gp(f) || f == Family::WR || f == Family::WL; }

Penalty family_penalty(Family f) noexcept {
  switch (f) {
    case Family::SR:
    case Family::FR:
    case Family::WR: return Penalty::L2;
    case Family::SL:
    case Family::FL:
    case Family::WL: return Penalty::L1;
    default: return Penalty::None;
  }
}

std::string MethodSpec::label() const {
  std::string s = family_name(family);
  if (family_needs_R(family)) s += std::to_string(R);
  return s;
}

void MethodSpec::validate() const {
  if (family_needs_R(family) && R == 0) throw ConfigError(std::string(family_name(family)) + " requires R >= 1");
  if (!family_needs_R(family) && R != 0) throw ConfigError(std::string(family_name(family)) + " does not take R");
  if (seeds.empty()) throw ConfigError(label() + ": at least one seed required");
}

MethodSpec parse_method_label(const std::string& label) {
  std::size_t split = label.size();
  while (split > 0 && label[split - 1] >= '0' && label[split - 1] <= '9') --split;
  MethodSpec spec;
  spec.family = family_from_name(label.substr(0, split));
  if (split < label.size()) {
    if (label.size() - split > 6) throw ConfigError("R out of range in `" + label + "`");
    spec.R = std::stoul(label.substr(split));
  }
  spec.validate();
  return spec;
}

std::size_t ExperimentResult::failures() const noexcept {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; }));
}

std::vector<std::uint64_t> restart_seeds(std::uint64_t seed, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = splitmix(seed * 0x100000001b3ULL + k);
  return out;
}

ExperimentResult run_experiment(std::span<const MethodSpec> methods, const RasterSeries& raster,
                                const ResponseSeries& response, std::span<const FoldSpec> folds,
                                const ExperimentSettings& settings) {
  check_paired(raster, response);
  if (methods.empty()) throw ConfigError("run_experiment: no methods");
  for (const auto& m : methods) m.validate();

  ExperimentResult result;
  for (const FoldSpec& fold : folds) {
    if (!settings.fold_years.empty() &&
        std::find(settings.fold_years.begin(), settings.fold_years.end(), fold.test_year) == settings.fold_years.end())
      continue;

    const AggregationEngine engine(raster, fold.train_days, settings.aggregation);
    FoldContext ctx;
    ctx.fold = &fold;
    ctx.engine = &engine;
    ctx.response = response.values;
    for (const auto& m : methods) {
      if ((m.family == Family::SR || m.family == Family::SL || m.family == Family::SGP) && !ctx.units) {
        ctx.unit_defs = unit_features(raster.grid(), raster.n_vars());
        ctx.units = build_feature_matrix(engine, ctx.unit_defs);
      }
      if ((m.family == Family::FR || m.family == Family::FL || m.family == Family::FGP) && !ctx.filters.count(m.R) &&
          !ctx.filter_errors.count(m.R)) {
        try {
          auto defs = build_filter_grid(m.R, raster.grid(), raster.n_vars()).features;
          auto mat = build_feature_matrix(engine, defs);
          ctx.filters.emplace(m.R, std::make_pair(std::move(defs), std::move(mat)));
        } catch (const InvalidInput& e) {
          ctx.filter_errors.emplace(m.R, e.what());
        }
      }
    }

    std::vector<std::pair<const MethodSpec*, CellResult>> jobs;
    for (const auto& m : methods) {
      const std::size_t n_seeds = family_is_seeded(m.family) ? m.seeds.size() : 1;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        CellResult cell;
        cell.method = m.label();
        cell.family = m.family;
        cell.R = m.R;
        cell.fold_year = fold.test_year;
        cell.seed = m.seeds[s];
        jobs.emplace_back(&m, std::move(cell));
      }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) run_cell(jobs[i].second, *jobs[i].first, ctx, settings);
    };
    const std::size_t n_threads = std::clamp<std::size_t>(settings.jobs, 1, std::max<std::size_t>(1, jobs.size()));
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (auto& j : jobs) result.cells.push_back(std::move(j.second));
  }
  return result;
}

}  // namespace geoagg
