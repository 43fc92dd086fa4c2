// Acceptance harness: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "geoagg/aggregation.hpp"
#include "geoagg/commands.hpp"
#include "geoagg/eval/experiment.hpp"
#include "geoagg/eval/stats.hpp"
#include "geoagg/gp/evolution.hpp"
#include "geoagg/linear.hpp"
#include "geoagg/membership_index.hpp"
#include "geoagg/spatial.hpp"
#include "geoagg/synthetic.hpp"
#include "geoagg/wrapper.hpp"

using namespace geoagg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MembershipMask brute_mask(const Circle& c, const GeoGrid& g) {
  MembershipMask m;
  double best = 1e300;
  std::uint32_t nearest = 0;
  for (std::size_t cell = 0; cell < g.cells(); ++cell) {
    const double d = haversine_km(g.center(cell), c.center());
    if (d <= c.radius_km) m.cells.push_back(static_cast<std::uint32_t>(cell));
    if (d < best) {
      best = d;
      nearest = static_cast<std::uint32_t>(cell);
    }
  }
  if (m.cells.empty()) m.cells.push_back(nearest);
  return m;
}

Outcome counting_parity() {
  const GeoGrid g(113, 113, 35.0, -120.0, 0.05, 0.05);
  for (std::size_t R = 1; R <= 20; ++R) {
    const auto f = build_filter_grid(R, g, 3);
    if (f.features.size() != 3 * R * R) return {false, "R=" + std::to_string(R) + " gave " + std::to_string(f.features.size())};
  }
  const auto units = unit_features(g, 3);
  const std::vector<Year> labels{2003, 2004, 2005, 2006, 2007, 2008, 2009, 2010, 2011};
  const auto folds = make_folds(split_years(1935, labels));
  bool all_1720 = folds.size() == 9;
  for (const auto& f : folds) all_1720 = all_1720 && f.train_days.size() == 1720;
  const bool ok = units.size() == 38307 && all_1720;
  return {ok, "filter 3R^2 for R 1..20; standard features " + std::to_string(units.size()) + "; fold train days " +
                  std::to_string(folds[0].train_days.size()) + " in all " + std::to_string(folds.size()) + " folds"};
}

Outcome bounce_back_exactness() {
  const double ex = bounce_back(1200.0);
  Rng rng(2024);
  std::uniform_real_distribution<double> wide(-5000.0, 6000.0);
  const GeoGrid g(32, 32, 30.0, 80.0, 0.25, 0.25);
  std::size_t outside = 0, mutated = 0;
  for (int i = 0; i < 10000; ++i) {
    const double r = bounce_back(wide(rng));
    if (!(r >= 0.0 && r <= kMaxRadiusKm)) ++outside;
    const auto m = mutate_circle_detailed(random_circle(rng, g), rng, g);
    if (m.radius_changed) ++mutated;
    if (!(m.circle.radius_km >= 0.0 && m.circle.radius_km <= kMaxRadiusKm)) ++outside;
  }
  return {ex == 800.0 && outside == 0, "1200 -> " + fmt("%g", ex) + " km; 2x10^4 proposals (" +
                                           std::to_string(mutated) + " via mutation) outside [0,1000]: " +
                                           std::to_string(outside)};
}

Outcome solver_oracles() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  double ridge_gap = 0, kkt = 0;
  bool zeros = true;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 40 + 10 * trial, p = 5 + 3 * trial;
    Matrix X(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = gauss(rng);
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = 2.0 * X(i, 0) - X(i, 1 % p) + 0.3 * gauss(rng) + 1.0;
    if (p < n) {
      const auto a = fit_ridge(X, y, 0.0);
      const auto b = fit_ols(X, y);
      ridge_gap = std::max({ridge_gap, (a.coefficients - b.coefficients).cwiseAbs().maxCoeff(),
                            std::abs(a.intercept - b.intercept)});
    }
    const double lmax = lasso_lambda_max(X, y);
    for (double frac : {0.5, 0.1, 0.01}) {
      const auto m = fit_lasso(X, y, frac * lmax);
      const Vector r = y - predict(m, X);
      for (int j = 0; j < p; ++j) {
        const double g = X.col(j).dot(r) / n;
        const double c = m.coefficients(j);
        kkt = std::max(kkt, c != 0.0 ? std::abs(g - m.lambda * (c > 0 ? 1.0 : -1.0)) : std::max(0.0, std::abs(g) - m.lambda));
      }
    }
    for (double f : {1.0, 2.0}) {
      const auto m = fit_lasso(X, y, f * lmax);
      zeros = zeros && (m.coefficients.array() == 0.0).all();
    }
  }
  return {ridge_gap <= 1e-8 && kkt <= 1e-6 && zeros, "ridge(0) vs OLS max gap " + fmt("%.2e", ridge_gap) +
                                                         "; lasso KKT residual " + fmt("%.2e", kkt) +
                                                         "; lambda>=lambda_max exact zeros: " + (zeros ? "yes" : "no")};
}

double enumerate_p(const std::vector<double>& d) {
  std::vector<double> nz;
  for (double v : d)
    if (v != 0.0) nz.push_back(v);
  const std::size_t n = nz.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      below += std::abs(nz[j]) < std::abs(nz[i]);
      equal += std::abs(nz[j]) == std::abs(nz[i]);
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double w = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (nz[i] > 0) w += rank[i];
  double lo = 0, hi = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += rank[i];
    lo += s <= w;
    hi += s >= w;
  }
  return std::min(1.0, 2.0 * std::min(lo, hi) / std::ldexp(1.0, static_cast<int>(n)));
}

Outcome statistics_oracle() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.2, 1.0);
  std::uniform_int_distribution<int> coarse(-3, 3);
  std::size_t mismatches = 0, samples = 0;
  while (samples < 100) {
    const std::size_t n = 1 + samples % 12;
    std::vector<double> a(n), b(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = samples % 2 ? static_cast<double>(coarse(rng)) : gauss(rng);
      b[i] = samples % 2 ? static_cast<double>(coarse(rng)) : gauss(rng);
      d[i] = a[i] - b[i];
    }
    if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) continue;
    ++samples;
    const auto r = wilcoxon_signed_rank(a, b);
    if (!r.exact || r.p_value != enumerate_p(d)) ++mismatches;
  }
  std::vector<double> p(9);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (auto& v : p) v = u(rng);
  p[0] = 0.004;
  const auto adj = bonferroni(p, 9);
  bool bonf = adj[0] == 9 * 0.004;
  for (std::size_t i = 0; i < 9; ++i) bonf = bonf && adj[i] == std::min(1.0, 9.0 * p[i]);
  return {mismatches == 0 && bonf, std::to_string(samples) + " samples n<=12 (half with ties), mismatches " +
                                       std::to_string(mismatches) + "; bonferroni 9p capped: " + (bonf ? "yes" : "no")};
}

Outcome aggregation_equivalence() {
  SyntheticConfig cfg;
  cfg.n_days = 120;
  const auto ds = generate_synthetic(cfg, 5);
  const auto folds = make_folds(ds.raster.day_year());
  AggregationEngine fast(ds.raster, folds[0].train_days, AggregationEngine::Strategy::Indexed);
  AggregationEngine slow(ds.raster, folds[0].train_days, AggregationEngine::Strategy::Naive);
  Rng rng(31);
  std::size_t mask_diff = 0;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    CircleFeature f{random_circle(rng, fast.grid()), static_cast<std::size_t>(i % 3)};
    if (i % 4 == 1) f.circle.radius_km *= 0.05;
    if (i % 50 == 7) f.circle.radius_km = 0.0;
    const auto m = fast.index().members(f.circle);
    if (!(m == brute_mask(f.circle, fast.grid()))) ++mask_diff;
    const auto a = fast.series(f);
    const auto b = slow.series(f);
    for (std::size_t d = 0; d < a.size(); ++d) worst = std::max(worst, std::abs(a[d] - b[d]));
  }
  return {mask_diff == 0 && worst <= 1e-12,
          "1000 circles on 32x32: mask mismatches " + std::to_string(mask_diff) + ", max value diff " + fmt("%.2e", worst)};
}

Outcome planted_recovery() {
  const SyntheticConfig cfg;  // 32x32, 400 days, 4 years, relative noise 0.1, product_sum
  const auto ds = generate_synthetic(cfg, 11);
  const auto folds = make_folds(ds.raster.day_year());

  ExperimentSettings s;
  s.gp.population = 200;
  s.gp.generations = 100;
  s.gp.runs = 5;
  s.gp.tune_scope = gp::TuneScope::PerIndividual;
  s.jobs = jobs();
  std::vector<MethodSpec> methods{parse_method_label("GPESA"), parse_method_label("SL")};
  methods[0].seeds = {1, 2, 3, 4, 5};
  for (std::size_t R : {1, 2, 4, 8}) methods.push_back(parse_method_label("FL" + std::to_string(R)));
  const auto res = run_experiment(methods, ds.raster, ds.response, folds, s);
  if (res.failures() > 0) {
    for (const auto& c : res.cells)
      if (!c.ok) return {false, c.method + " " + std::to_string(c.fold_year) + " failed: " + c.error};
  }
  std::size_t wins = 0;
  std::ostringstream detail;
  for (const auto& f : folds) {
    std::vector<double> gpesa;
    double baseline = 1e300;
    std::string which;
    for (const auto& c : res.cells) {
      if (c.fold_year != f.test_year) continue;
      if (c.family == Family::GPESA) {
        gpesa.push_back(c.test_mae);
      } else if (c.test_mae < baseline) {
        baseline = c.test_mae;
        which = c.method;
      }
    }
    const double med = median(gpesa);
    wins += med < baseline;
    detail << f.test_year << ": " << fmt("%.3f", med) << " vs " << which << ' ' << fmt("%.3f", baseline) << "; ";
  }
  detail << "GPESA wins " << wins << "/4";
  return {wins >= 3, detail.str()};
}

Outcome wrapper_recovery() {
  SyntheticConfig cfg;
  cfg.formula = "identity";
  std::size_t close = 0;
  std::vector<double> dist;
  WrapperConfig wc;
  wc.iterations = 1000;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    // One planted circle per seed, kept clear of the border.
    Rng rng(seed * 7919);
    std::uniform_int_distribution<std::size_t> rc(6, 25);
    std::uniform_real_distribution<double> rad(80.0, 200.0);
    const std::size_t row = rc(rng), col = rc(rng);
    GeoGrid g(cfg.rows, cfg.cols, cfg.lat0, cfg.lon0, cfg.lat_step, cfg.lon_step);
    SyntheticConfig c = cfg;
    c.planted = {{{g.lat_of(row), g.lon_of(col), rad(rng)}, static_cast<std::size_t>(seed % 3)}};
    const auto ds = generate_synthetic(c, seed);
    const auto fold = make_folds(ds.raster.day_year())[0];
    AggregationEngine engine(ds.raster, fold.train_days);
    const WrapperProblem problem{&engine, fold.train_days, ds.response.values};
    const auto seeds = restart_seeds(seed, 5);
    const auto res = multi_restart(Penalty::L2, 1, problem, wc, seeds, jobs());
    const auto& learned = res.features[c.planted[0].var].circle;
    const double d = std::hypot(g.row_of(learned.lat) - static_cast<double>(row), g.col_of(learned.lon) - static_cast<double>(col));
    dist.push_back(d);
    close += d <= 2.0;
  }
  return {close >= 16, "center within 2 cells in " + std::to_string(close) + "/20 seeds (median distance " +
                           fmt("%.2f", median(dist)) + " cells)"};
}

Outcome overhead_measurement() {
  SyntheticConfig cfg;
  const auto ds = generate_synthetic(cfg, 3);
  const auto fold = make_folds(ds.raster.day_year())[0];
  gp::GpConfig gc;
  gc.population = 100;
  gc.generations = 20;
  gc.runs = 1;
  auto per_eval = [&](gp::GpMode mode, AggregationEngine::Strategy strategy) {
    AggregationEngine engine(ds.raster, fold.train_days, strategy);
    std::optional<FeatureMatrix> units;
    gp::GpProblem problem{mode, nullptr, &engine, fold.train_days, ds.response.values};
    if (mode == gp::GpMode::Standard) {
      const auto defs = unit_features(ds.raster.grid(), ds.raster.n_vars());
      units = build_feature_matrix(engine, defs);
      problem.features = &*units;
    }
    const auto r = gp::run_evolution(problem, gc, 17);
    return r.log.evaluation_seconds / static_cast<double>(r.log.evaluations);
  };
  const double sgp = per_eval(gp::GpMode::Standard, AggregationEngine::Strategy::Indexed);
  const double indexed = per_eval(gp::GpMode::Gpesa, AggregationEngine::Strategy::Indexed) / sgp;
  const double naive = per_eval(gp::GpMode::Gpesa, AggregationEngine::Strategy::Naive) / sgp;
  return {indexed < naive, "GPESA/SGP per-evaluation time: indexed " + fmt("%.2f", indexed) + "x, naive " +
                               fmt("%.2f", naive) + "x (SGP " + fmt("%.1f", sgp * 1e6) + " us/eval)"};
}

Outcome evolution_invariants() {
  SyntheticConfig cfg;
  const auto ds = generate_synthetic(cfg, 8);
  const auto fold = make_folds(ds.raster.day_year())[0];
  AggregationEngine engine(ds.raster, fold.train_days);
  gp::GpProblem problem{gp::GpMode::Gpesa, nullptr, &engine, fold.train_days, ds.response.values};
  gp::GpConfig gc;
  gc.population = 100;
  gc.generations = 50;
  gc.runs = 1;
  const auto r = gp::run_evolution(problem, gc, 4, true);
  const auto& log = r.log.generations;
  bool size_ok = log.size() == 50, limits_ok = true, finite_ok = true, deltas_ok = true, monotone = true;
  std::size_t deltas = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    size_ok = size_ok && log[i].population == gc.population;
    limits_ok = limits_ok && log[i].max_height <= gc.limits.max_height && log[i].max_size <= gc.limits.max_size;
    finite_ok = finite_ok && log[i].non_finite_errors == 0 && std::isfinite(log[i].best_error);
    for (double d : log[i].accepted_tune_deltas) deltas_ok = deltas_ok && d < 0.0;
    deltas += log[i].accepted_tune_deltas.size();
    if (i > 0) monotone = monotone && log[i].best_error <= log[i - 1].best_error;
  }
  const bool ok = size_ok && limits_ok && finite_ok && deltas_ok && monotone && deltas > 0;
  return {ok, std::to_string(log.size()) + " generations: size constant " + (size_ok ? "yes" : "no") + ", limits " +
                  (limits_ok ? "held" : "violated") + ", NaN fitness " + (finite_ok ? "none" : "seen") + ", " +
                  std::to_string(deltas) + " accepted deltas all negative " + (deltas_ok ? "yes" : "no") +
                  ", best error " + fmt("%.4f", log.front().best_error) + " -> " + fmt("%.4f", log.back().best_error) +
                  (monotone ? " non-increasing" : " INCREASED")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "geoagg_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  nlohmann::json cfg = nlohmann::json::parse(R"({
    "version": 1,
    "dataset": {"generator": {"rows": 12, "cols": 12, "n_days": 160}, "seed": 21},
    "methods": ["SR", "SL", "FR2", "FL4", "SGP", "FGP2", "GPESA", "WR1", "WL1"],
    "seeds": [1, 2],
    "folds": {"years": [2003, 2005]},
    "jobs": 4,
    "gp": {"population": 30, "generations": 5, "runs": 2},
    "wrapper": {"iterations": 40, "restarts": 2}
  })");
  std::ofstream(dir / "run.json") << cfg.dump(2);
  std::ostringstream log;
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    cli::RunOptions o;
    o.config = dir / "run.json";
    o.out = dir / ("out" + std::to_string(k));
    codes[k] = cli::run_command([&] { return cli::cmd_run(o, log); }, log);
  }
  const std::string a = slurp(dir / "out0" / "results.csv");
  const std::string b = slurp(dir / "out1" / "results.csv");
  const bool preds = slurp(dir / "out0" / "predictions.csv") == slurp(dir / "out1" / "predictions.csv");
  const std::size_t lines = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
  fs::remove_all(dir);
  const bool ok = codes[0] == 0 && codes[1] == 0 && !a.empty() && a == b;
  return {ok, "exit codes " + std::to_string(codes[0]) + "," + std::to_string(codes[1]) + "; results.csv " +
                  std::to_string(lines) + " lines byte-identical: " + (a == b ? "yes" : "no") +
                  "; predictions.csv identical: " + (preds ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoagg acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "counting parity", 1.0, counting_parity},
      {2, "bounce-back exactness", 10.0, bounce_back_exactness},
      {3, "solver oracles", 10.0, solver_oracles},
      {4, "statistics oracle", 30.0, statistics_oracle},
      {5, "aggregation equivalence", 30.0, aggregation_equivalence},
      {6, "planted-signal recovery", 1800.0, planted_recovery},
      {7, "wrapper recovery", 600.0, wrapper_recovery},
      {8, "overhead measurement", 300.0, overhead_measurement},
      {9, "evolution invariants", 300.0, evolution_invariants},
      {10, "determinism", 600.0, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " A" << c.id << " " << c.name << ": " << o.detail << " ["
              << fmt("%.2f", secs) << " s, budget " << fmt("%g", c.budget_seconds) << " s"
              << (in_budget ? "" : ", OVER BUDGET") << "]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
