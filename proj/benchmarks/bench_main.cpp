#include <benchmark/benchmark.h>

#include <random>

#include "geoagg/aggregation.hpp"
#include "geoagg/gp/operators.hpp"
#include "geoagg/gp/tree.hpp"
#include "geoagg/linear.hpp"
#include "geoagg/synthetic.hpp"

using namespace geoagg;

namespace {

const SyntheticDataset& dataset() {
  static const SyntheticDataset ds = [] {
    SyntheticConfig cfg;
    cfg.n_days = 240;
    return generate_synthetic(cfg, 3);
  }();
  return ds;
}

std::vector<DayIndex> train_days() {
  const auto folds = make_folds(dataset().raster.day_year());
  return folds[0].train_days;
}

void BM_EvalTree(benchmark::State& state) {
  const std::size_t nd = 1000;
  std::mt19937_64 g(1);
  std::normal_distribution<double> n;
  FeatureMatrix fm{8, nd, std::vector<double>(8 * nd)};
  for (double& v : fm.data) v = n(g);
  const auto factory = gp::PrimitiveFactory::features(8);
  Rng rng(2);
  const gp::Tree tree = factory.full(static_cast<std::size_t>(state.range(0)), rng);
  std::vector<DayIndex> days(nd);
  for (std::size_t d = 0; d < nd; ++d) days[d] = d;
  std::vector<double> out(nd);
  for (auto _ : state) {
    gp::eval_tree(tree, {&fm}, days, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * nd * tree.size()));
}
BENCHMARK(BM_EvalTree)->Arg(3)->Arg(6);

// One random circle per iteration, series over every day.
void BM_Aggregate(benchmark::State& state) {
  const auto strategy =
      state.range(0) ? AggregationEngine::Strategy::Indexed : AggregationEngine::Strategy::Naive;
  const auto days = train_days();
  const AggregationEngine engine(dataset().raster, days, strategy);
  Rng rng(4);
  for (auto _ : state) {
    const CircleFeature f{random_circle(rng, engine.grid()), 0};
    benchmark::DoNotOptimize(engine.series(f));
  }
  state.SetLabel(state.range(0) ? "indexed" : "brute force");
}
BENCHMARK(BM_Aggregate)->Arg(1)->Arg(0)->Unit(benchmark::kMicrosecond);

void BM_LassoPath(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto p = static_cast<Eigen::Index>(state.range(1));
  std::mt19937_64 g(5);
  std::normal_distribution<double> z;
  Matrix X(n, p);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = z(g);
    y(i) = X(i, 0) - 2.0 * X(i, p / 2) + 0.5 * z(g);
  }
  const auto grid = default_penalty_grid(X, y, Penalty::L1, 50);
  for (auto _ : state) benchmark::DoNotOptimize(fit_path(X, y, Penalty::L1, grid));
}
BENCHMARK(BM_LassoPath)->Args({240, 48})->Args({240, 768})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
