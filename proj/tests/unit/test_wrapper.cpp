#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "geoagg/wrapper.hpp"
#include "helpers.hpp"

using namespace geoagg;

namespace {

struct Fixture {
  SyntheticDataset ds;
  FoldSpec fold;
  AggregationEngine engine;

  explicit Fixture(std::uint64_t seed)
      : ds(generate_synthetic(test::small_config(16, 16, 160), seed)),
        fold(make_folds(ds.raster.day_year())[0]),
        engine(ds.raster, fold.train_days) {}

  WrapperProblem problem() const { return {&engine, fold.train_days, ds.response.values}; }
};

}  // namespace

TEST_SUITE("wrapper") {

TEST_CASE("hill climbing keeps only improvements") {
  Fixture fx(1);
  WrapperConfig cfg;
  cfg.iterations = 80;
  cfg.keep_trace = true;
  const auto res = hill_climb(Penalty::L2, 2, fx.problem(), cfg, 7);
  CHECK(res.features.size() == 3 * 4);
  CHECK(res.series.n_features == 12);
  CHECK(res.model.coefficients.size() == 12);
  REQUIRE(res.trace.size() == 80);
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : res.trace) {
    CHECK(s.accepted == (s.holdout_mae < s.baseline_mae));
    if (s.accepted) last = s.holdout_mae;
  }
  if (!std::isnan(last)) CHECK(res.best_error == last);
  for (std::size_t k = 0; k < res.features.size(); ++k) {
    CHECK(res.features[k].var == k / 4);
    CHECK_NOTHROW(validate_circle(res.features[k].circle, fx.engine.grid()));
  }
}

TEST_CASE("running-best acceptance gives strictly decreasing accepted errors") {
  Fixture fx(6);
  WrapperConfig cfg;
  cfg.iterations = 80;
  cfg.keep_trace = true;
  cfg.acceptance = WrapperAcceptance::RunningBest;
  const auto res = hill_climb(Penalty::L2, 1, fx.problem(), cfg, 8);
  REQUIRE(!res.trace.empty());
  double running = res.trace.front().baseline_mae;
  for (const auto& s : res.trace) {
    CHECK(s.baseline_mae == running);
    if (!s.accepted) continue;
    CHECK(s.holdout_mae < running);
    running = s.holdout_mae;
  }
  CHECK(res.best_error == running);
}

TEST_CASE("stored series and training error agree with a fresh aggregation") {
  Fixture fx(2);
  WrapperConfig cfg;
  cfg.iterations = 40;
  const auto res = hill_climb(Penalty::L1, 1, fx.problem(), cfg, 3);
  for (std::size_t k = 0; k < res.features.size(); ++k) {
    const auto s = fx.engine.series(res.features[k]);
    for (DayIndex d = 0; d < s.size(); ++d) CHECK(res.series.row(k)[d] == s[d]);
  }
  const auto pred = res.predict(fx.fold.train_days);
  std::vector<double> actual;
  for (auto d : fx.fold.train_days) actual.push_back(fx.ds.response.values[d]);
  CHECK(res.training_mae == doctest::Approx(mae(pred, actual)).epsilon(1e-12));
}

TEST_CASE("deterministic in seed; restarts pick the best climb") {
  Fixture fx(3);
  WrapperConfig cfg;
  cfg.iterations = 30;
  const auto a = hill_climb(Penalty::L2, 1, fx.problem(), cfg, 11);
  const auto b = hill_climb(Penalty::L2, 1, fx.problem(), cfg, 11);
  CHECK(a.features == b.features);
  CHECK(a.training_mae == b.training_mae);
  const std::vector<std::uint64_t> seeds{11, 12, 13};
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_seed = 0;
  for (auto s : seeds) {
    const auto r = hill_climb(Penalty::L2, 1, fx.problem(), cfg, s);
    if (r.training_mae < best) {
      best = r.training_mae;
      best_seed = s;
    }
  }
  for (std::size_t jobs : {1u, 3u}) {
    const auto m = multi_restart(Penalty::L2, 1, fx.problem(), cfg, seeds, jobs);
    CHECK(m.seed == best_seed);
    CHECK(m.training_mae == best);
  }
}

TEST_CASE("trace file") {
  test::TempDir dir("trace");
  save_wrapper_trace({{0, false, 1.5, 1.4}, {1, true, 1.25, 1.5}}, dir.path() / "t.csv");
  std::ifstream in(dir.path() / "t.csv");
  std::string header, l1, l2;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(header == "iter,accepted,holdout_mae,baseline_mae");
  CHECK(l2 == "1,1,1.25,1.5");
}

TEST_CASE("zero iterations refits the random start; one more changes at most one circle") {
  Fixture fx(4);
  WrapperConfig cfg;
  cfg.iterations = 0;
  cfg.keep_trace = true;
  const auto zero = hill_climb(Penalty::L2, 2, fx.problem(), cfg, 21);
  CHECK(zero.trace.empty());
  REQUIRE(zero.features.size() == 12);
  for (const auto& f : zero.features) CHECK_NOTHROW(validate_circle(f.circle, fx.engine.grid()));
  const auto pred = zero.predict(fx.fold.train_days);
  std::vector<double> actual;
  for (auto d : fx.fold.train_days) actual.push_back(fx.ds.response.values[d]);
  CHECK(zero.training_mae == doctest::Approx(mae(pred, actual)).epsilon(1e-12));
  for (double v : pred) CHECK(std::isfinite(v));

  cfg.iterations = 1;
  const auto one = hill_climb(Penalty::L2, 2, fx.problem(), cfg, 21);
  std::size_t changed = 0;
  for (std::size_t k = 0; k < 12; ++k) changed += !(one.features[k] == zero.features[k]);
  CHECK(changed <= 1);
  CHECK(changed == static_cast<std::size_t>(one.trace.at(0).accepted));
}

TEST_CASE("a single restart is the plain climb") {
  Fixture fx(5);
  WrapperConfig cfg;
  cfg.iterations = 25;
  const std::vector<std::uint64_t> seeds{9};
  const auto m = multi_restart(Penalty::L1, 1, fx.problem(), cfg, seeds, 2);
  const auto h = hill_climb(Penalty::L1, 1, fx.problem(), cfg, 9);
  CHECK(m.features == h.features);
  CHECK(m.training_mae == h.training_mae);
  CHECK(m.best_error == h.best_error);
  CHECK(m.seed == 9);
}

}  // TEST_SUITE wrapper
