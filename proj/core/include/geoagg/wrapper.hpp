#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "geoagg/aggregation.hpp"
#include "geoagg/design.hpp"
#include "geoagg/linear.hpp"

namespace geoagg {

// Paired: each iteration draws a fresh split and keeps the mutation iff it
// beats the unmutated circles on that same split. RunningBest: keep it iff
// its error on the fresh split beats the best error seen so far.
enum class WrapperAcceptance { Paired, RunningBest };

struct WrapperConfig {
  std::size_t iterations = 1000;
  double subset_fraction = 0.5;  // share of training days used for each refit
  WrapperAcceptance acceptance = WrapperAcceptance::Paired;
  CvPlan cv{};                   // empty grid: default_penalty_grid
  LassoOptions lasso{};
  bool keep_trace = false;
};

// One fold as seen by the wrapper. `response` is indexed by day.
struct WrapperProblem {
  const AggregationEngine* engine = nullptr;
  std::span<const DayIndex> train_days;
  std::span<const double> response;
};

struct WrapperStep {
  std::size_t iter = 0;
  bool accepted = false;
  double holdout_mae = 0.0;   // mutated circles
  double baseline_mae = 0.0;  // what it had to beat
};

struct WrapperResult {
  std::vector<CircleFeature> features;  // R^2 circles per variable, var-major
  FeatureMatrix series;                 // aggregated series of `features`, all days
  ColumnScaling scaling;
  LinearModel model;                    // refit on every training day
  double lambda = 0.0;
  double best_error = 0.0;              // held-out MAE of the last accepted state
  double training_mae = 0.0;
  std::uint64_t seed = 0;
  std::vector<WrapperStep> trace;

  // Predictions for `days` from the stored series.
  std::vector<double> predict(std::span<const DayIndex> days) const;
};

// Random circles refined one mutation at a time; a mutation stays only when
// the model refit on a random subset of training days lowers the MAE on the
// complementary days (see WrapperAcceptance).
WrapperResult hill_climb(Penalty kind, std::size_t R, const WrapperProblem& problem, const WrapperConfig& config,
                         std::uint64_t seed);

// Independent climbs, one per seed, run on up to `jobs` threads. Returns the
// lowest training MAE; ties go to the earlier seed.
WrapperResult multi_restart(Penalty kind, std::size_t R, const WrapperProblem& problem, const WrapperConfig& config,
                            std::span<const std::uint64_t> seeds, std::size_t jobs = 1);

// CSV `iter,accepted,holdout_mae,baseline_mae`.
void save_wrapper_trace(const std::vector<WrapperStep>& trace, const std::filesystem::path& path);

}  // namespace geoagg
