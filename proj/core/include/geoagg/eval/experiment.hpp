#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoagg/aggregation.hpp"
#include "geoagg/gp/evolution.hpp"
#include "geoagg/linear.hpp"
#include "geoagg/raster.hpp"
#include "geoagg/wrapper.hpp"

namespace geoagg {

// Standard (per-unit), filter and wrapper constructions with ridge, lasso or
// GP, plus GP with embedded aggregation.
enum class Family { SR, SL, SGP, FR, FL, FGP, WR, WL, GPESA };

const char* family_name(Family f) noexcept;
Family family_from_name(const std::string& name);  // throws ConfigError
bool family_needs_R(Family f) noexcept;
bool family_is_gp(Family f) noexcept;
// Deterministic families ignore all but the first seed.
bool family_is_seeded(Family f) noexcept;
Penalty family_penalty(Family f) noexcept;  // None for GP families

struct MethodSpec {
  Family family = Family::SL;
  std::size_t R = 0;  // 0 when the family takes no R
  std::vector<std::uint64_t> seeds{1};

  std::string label() const;  // "SL", "FR15"
  void validate() const;      // throws ConfigError
};

// "SL", "GPESA", "FR15", "WL2".
MethodSpec parse_method_label(const std::string& label);

struct ExperimentSettings {
  gp::GpConfig gp{};
  WrapperConfig wrapper{};
  std::size_t wrapper_restarts = 5;
  CvPlan cv{};  // empty grid: default_penalty_grid per fit
  LassoOptions lasso{1e-5, 10000};  // correlated unit features converge slowly at 1e-7
  std::size_t jobs = 1;
  AggregationEngine::Strategy aggregation = AggregationEngine::Strategy::Indexed;
  std::vector<Year> fold_years;  // empty: every fold
};

// One (method, fold, seed) cell.
struct CellResult {
  std::string method;
  Family family = Family::SL;
  std::size_t R = 0;
  Year fold_year = 0;
  std::uint64_t seed = 0;

  bool ok = false;
  std::string error;

  double train_err = 0.0;  // training MAE (linear) or training f_COR (GP)
  double test_mae = 0.0;
  double seconds = 0.0;

  std::vector<DayIndex> test_days;
  std::vector<double> actual;
  std::vector<double> predicted;

  // Provenance of the scaling applied to test days and the tag of the
  // fold's training days; equal by construction.
  std::uint64_t scaling_provenance = 0;
  std::uint64_t train_tag = 0;

  std::vector<CircleFeature> circles;  // model columns or GP feature terminals
  std::optional<LinearModel> linear;
  std::optional<gp::ScaledModel> gp_model;
  std::vector<gp::GpIndividual> front;
  std::size_t gp_evaluations = 0;
  double gp_evaluation_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // fold-major, then method, then seed

  std::size_t failures() const noexcept;
};

// Runs every method on every selected fold. Standardization and feature
// scaling are fit on each fold's training days and reapplied to its test
// days. A failing cell is recorded with its error; the rest continue.
ExperimentResult run_experiment(std::span<const MethodSpec> methods, const RasterSeries& raster,
                                const ResponseSeries& response, std::span<const FoldSpec> folds,
                                const ExperimentSettings& settings);

// Seeds for the wrapper restarts of one cell.
std::vector<std::uint64_t> restart_seeds(std::uint64_t seed, std::size_t count);

}  // namespace geoagg
