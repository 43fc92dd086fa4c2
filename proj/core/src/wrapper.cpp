#include "geoagg/wrapper.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

Rng wrapper_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x7772u};
  return Rng(seq);
}

struct Fitter {
  Penalty kind;
  double lambda;
  const LassoOptions* lasso;

  LinearModel operator()(const Matrix& X, const Vector& y) const {
    if (kind == Penalty::L1) return fit_lasso(X, y, lambda, *lasso);
    if (kind == Penalty::L2) return fit_ridge(X, y, lambda);
    return fit_ols(X, y);
  }
};

template <typename Fn>
auto with_context(std::size_t iter, Fn&& fn) {
  const std::string where = "wrapper iteration " + std::to_string(iter) + ": ";
  try {
    return fn();
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(where + e.what(), e.last_iterate(), e.sweeps());
  } catch (const InvalidInput& e) {
    throw InvalidInput(where + e.what());
  }
}

void set_row(FeatureMatrix& m, std::size_t f, const std::vector<double>& values) {
  std::copy(values.begin(), values.end(), m.data.begin() + static_cast<std::ptrdiff_t>(f * m.n_days));
}

}  // namespace

std::vector<double> WrapperResult::predict(std::span<const DayIndex> days) const {
  const Vector p = geoagg::predict(model, design_matrix(series, days, scaling));
  return {p.data(), p.data() + p.size()};
}

WrapperResult hill_climb(Penalty kind, std::size_t R, const WrapperProblem& problem, const WrapperConfig& config,
                         std::uint64_t seed) {
  if (!problem.engine) throw InvalidInput("hill_climb: aggregation engine required");
  if (R == 0) throw InvalidInput("hill_climb: R must be >= 1");
  if (kind == Penalty::None) throw InvalidInput("hill_climb: ridge or lasso required");
  if (!(config.subset_fraction > 0.0 && config.subset_fraction < 1.0))
    throw InvalidInput("hill_climb: subset_fraction must lie in (0, 1)");
  const std::size_t n = problem.train_days.size();
  const std::size_t n_fit = static_cast<std::size_t>(config.subset_fraction * static_cast<double>(n));
  if (n_fit < 2 || n - n_fit < 1) throw InvalidInput("hill_climb: too few training days for the split");

  const AggregationEngine& engine = *problem.engine;
  Rng rng = wrapper_rng(seed);
  WrapperResult st;
  st.seed = seed;

  const std::size_t n_vars = engine.raster().n_vars();
  for (std::size_t v = 0; v < n_vars; ++v)
    for (std::size_t k = 0; k < R * R; ++k) st.features.push_back({random_circle(rng, engine.grid()), v});
  st.series = build_feature_matrix(engine, st.features);
  st.scaling = fit_column_scaling(st.series, problem.train_days);

  const Vector y_train = gather_vector(problem.response, problem.train_days);
  {
    CvPlan plan = config.cv;
    const Matrix X = design_matrix(st.series, problem.train_days, st.scaling);
    if (plan.penalty_grid.empty()) plan.penalty_grid = default_penalty_grid(X, y_train, kind);
    st.lambda = with_context(0, [&] { return select_penalty_cv(X, y_train, kind, plan, config.lasso).lambda; });
  }
  const Fitter fit{kind, st.lambda, &config.lasso};

  std::vector<DayIndex> shuffled(problem.train_days.begin(), problem.train_days.end());
  // Error of the current circles on the current split.
  auto holdout_error = [&](std::size_t iter) {
    const std::span<const DayIndex> fit_days(shuffled.data(), n_fit);
    const std::span<const DayIndex> hold_days(shuffled.data() + n_fit, n - n_fit);
    return with_context(iter, [&] {
      const LinearModel m = fit(design_matrix(st.series, fit_days, st.scaling), gather_vector(problem.response, fit_days));
      const Vector p = geoagg::predict(m, design_matrix(st.series, hold_days, st.scaling));
      return mae(p, gather_vector(problem.response, hold_days));
    });
  };

  const bool paired = config.acceptance == WrapperAcceptance::Paired;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  st.best_error = config.iterations > 0 ? holdout_error(0) : std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<std::size_t> pick(0, st.features.size() - 1);
  std::vector<double> saved_row(st.series.n_days);
  for (std::size_t iter = 1; iter <= config.iterations; ++iter) {
    const std::size_t f = pick(rng);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double baseline = paired ? holdout_error(iter) : st.best_error;
    const CircleFeature saved_def = st.features[f];
    const auto row = st.series.row(f);
    std::copy(row.begin(), row.end(), saved_row.begin());
    const double saved_mean = st.scaling.mean[f];
    const double saved_scale = st.scaling.scale[f];

    st.features[f].circle = mutate_circle(saved_def.circle, rng, engine.grid());
    set_row(st.series, f, engine.series(st.features[f]));
    refit_column(st.scaling, st.series, f, problem.train_days);

    const double err = holdout_error(iter);
    const bool accepted = err < baseline;
    if (accepted) {
      st.best_error = err;
    } else {
      st.features[f] = saved_def;
      set_row(st.series, f, saved_row);
      st.scaling.mean[f] = saved_mean;
      st.scaling.scale[f] = saved_scale;
    }
    if (config.keep_trace) st.trace.push_back({iter, accepted, err, baseline});
  }

  const Matrix X = design_matrix(st.series, problem.train_days, st.scaling);
  st.model = with_context(config.iterations, [&] { return fit(X, y_train); });
  st.training_mae = mae(geoagg::predict(st.model, X), y_train);
  return st;
}

WrapperResult multi_restart(Penalty kind, std::size_t R, const WrapperProblem& problem, const WrapperConfig& config,
                            std::span<const std::uint64_t> seeds, std::size_t jobs) {
  if (seeds.empty()) throw InvalidInput("multi_restart: at least one seed required");
  std::vector<std::optional<WrapperResult>> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = hill_climb(kind, R, problem, config, seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, seeds.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i]->training_mae < results[best]->training_mae) best = i;
  return std::move(*results[best]);
}

void save_wrapper_trace(const std::vector<WrapperStep>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "iter,accepted,holdout_mae,baseline_mae\n";
  char buf[64];
  auto num = [&](double v) { return std::string_view(buf, static_cast<std::size_t>(std::to_chars(buf, buf + sizeof buf, v).ptr - buf)); };
  for (const auto& s : trace) {
    out << s.iter << ',' << (s.accepted ? 1 : 0) << ',' << num(s.holdout_mae);
    out << ',' << num(s.baseline_mae) << '\n';
  }
  if (!out) throw InvalidInput("write failed: " + path.string());
}

}  // namespace geoagg
