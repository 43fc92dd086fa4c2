#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoagg/eval/experiment.hpp"

namespace geoagg {

// Row of `method,R,fold_year,seed,train_err,test_mae,seconds`. R and
// seconds are `NA` when absent.
struct ResultRow {
  std::string method;
  std::optional<std::size_t> R;
  Year fold_year = 0;
  std::uint64_t seed = 0;
  double train_err = 0.0;
  double test_mae = 0.0;
  std::optional<double> seconds;
};

// Row of `method,R,fold_year,seed,day,actual,predicted`.
struct PredictionRow {
  std::string method;
  Year fold_year = 0;
  std::uint64_t seed = 0;
  DayIndex day = 0;
  double actual = 0.0;
  double predicted = 0.0;
};

std::string format_double(double v);

// Successful cells only. Wall-clock seconds are written only when
// `record_timing` is set so that repeated runs compare byte for byte.
void write_results_csv(std::span<const CellResult> cells, const std::filesystem::path& path, bool record_timing);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

void write_predictions_csv(std::span<const CellResult> cells, const std::filesystem::path& path);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

// `method,R,fold_year,seed,seconds,gp_evaluations,gp_evaluation_seconds`.
void write_timings_csv(std::span<const CellResult> cells, const std::filesystem::path& path);

// Circles, linear model, GP expression with its scaling, and the GP front
// under `dir/<method>_<year>_<seed>.*`.
void write_cell_artifacts(const CellResult& cell, const std::filesystem::path& dir, std::uint64_t config_hash);
std::string artifact_stem(const std::string& method, Year year, std::uint64_t seed);

// Front CSV `error,age,size,expr`; aggregate terminals come back unbound.
void save_front_csv(std::span<const gp::GpIndividual> front, const std::filesystem::path& path);
std::vector<gp::GpIndividual> load_front_csv(const std::filesystem::path& path);

struct YearComparison {
  Year year = 0;
  double p_raw = 1.0;
  double p_bonferroni = 1.0;
  std::string winner;  // method label, or "none"
  std::size_t n_days = 0;
};

// Per test year, a signed-rank test on per-day absolute errors of `a` versus
// `b` (median over seeds when a method has several). Bonferroni over the
// number of years; a winner is named when the adjusted p is below `alpha`.
// Throws InvalidInput naming every missing (method, year) pair.
std::vector<YearComparison> compare_methods(std::span<const PredictionRow> predictions, const std::string& a,
                                            const std::string& b, double alpha = 0.05);

// Median test MAE over seeds for every (method, year) in `rows`.
struct SummaryRow {
  std::string method;
  Year fold_year = 0;
  double median_test_mae = 0.0;
  std::size_t seeds = 0;
};
std::vector<SummaryRow> summarize_results(std::span<const ResultRow> rows);

// For each R-indexed family and year, the R with the lowest median test MAE.
// Choosing R on test error makes this an optimistic bound, not a fair score.
struct BestRow {
  std::string family;
  Year fold_year = 0;
  std::string method;
  double median_test_mae = 0.0;
};
std::vector<BestRow> best_by_year(std::span<const ResultRow> rows);

// CSV `method,fold_year,median_test_mae,seeds`.
void write_summary_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path);
// CSV `family,fold_year,best_method,median_test_mae,selection`; selection is
// always `optimistic_test_min`.
void write_best_by_year_csv(std::span<const BestRow> rows, const std::filesystem::path& path);

// CSV `year,p_raw,p_bonferroni,winner`.
void write_stats_csv(std::span<const YearComparison> rows, const std::filesystem::path& path);

}  // namespace geoagg
