#include "geoagg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "geoagg/errors.hpp"

namespace geoagg {

GeoGrid::GeoGrid(std::size_t rows, std::size_t cols, double lat0, double lon0, double lat_step,
                 double lon_step)
    : rows_(rows), cols_(cols), lat0_(lat0), lon0_(lon0), lat_step_(lat_step), lon_step_(lon_step) {
  if (rows == 0 || cols == 0) throw InvalidInput("GeoGrid: rows and cols must be >= 1");
  if (!(lat_step > 0.0) || !(lon_step > 0.0) || !std::isfinite(lat_step) || !std::isfinite(lon_step))
    throw InvalidInput("GeoGrid: spacing must be finite and strictly positive");
  if (!std::isfinite(lat0) || !std::isfinite(lon0)) throw InvalidInput("GeoGrid: non-finite corner");
  if (lat_min() < -90.0 || lat_max() > 90.0) throw InvalidInput("GeoGrid: latitude outside [-90, 90]");
  if (lon_min() < -180.0 || lon_max() >= 180.0) throw InvalidInput("GeoGrid: longitude outside [-180, 180)");
}

RasterSeries::RasterSeries(GeoGrid grid, std::size_t n_vars, std::vector<Year> day_year,
                           std::vector<double> values)
    : grid_(grid), n_vars_(n_vars), day_year_(std::move(day_year)), values_(std::move(values)) {
  if (n_vars_ == 0) throw InvalidInput("RasterSeries: n_vars must be >= 1");
  if (values_.size() != day_year_.size() * grid_.cells() * n_vars_)
    throw InvalidInput("RasterSeries: value count does not match dimensions");
  if (!std::is_sorted(day_year_.begin(), day_year_.end()))
    throw InvalidInput("RasterSeries: day_year must be non-decreasing");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInput("RasterSeries: non-finite value");
}

void check_paired(const RasterSeries& raster, const ResponseSeries& response) {
  if (response.values.size() != response.day_year.size())
    throw InvalidInput("ResponseSeries: values and day_year lengths differ");
  if (response.size() != raster.n_days())
    throw InvalidInput("ResponseSeries: length " + std::to_string(response.size()) +
                       " does not match raster day count " + std::to_string(raster.n_days()));
  if (!std::equal(response.day_year.begin(), response.day_year.end(), raster.day_year().begin()))
    throw InvalidInput("ResponseSeries: year labels differ from the raster's");
}

std::vector<FoldSpec> make_folds(std::span<const Year> day_year) {
  std::map<Year, std::vector<DayIndex>> by_year;
  for (DayIndex d = 0; d < day_year.size(); ++d) by_year[day_year[d]].push_back(d);
  if (by_year.size() < 2) throw InvalidInput("make_folds: need at least 2 distinct years");

  std::vector<FoldSpec> folds;
  folds.reserve(by_year.size());
  for (const auto& [year, days] : by_year) {
    FoldSpec fold;
    fold.test_year = year;
    fold.test_days = days;
    for (DayIndex d = 0; d < day_year.size(); ++d)
      if (day_year[d] != year) fold.train_days.push_back(d);
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::uint64_t fold_tag(std::span<const DayIndex> days) {
  // Commutative mix of per-day splitmix64 hashes.
  std::uint64_t sum = 0x9e3779b97f4a7c15ULL;
  std::uint64_t x = 0;
  for (DayIndex d : days) {
    std::uint64_t z = static_cast<std::uint64_t>(d) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    sum += z;
    x ^= z;
  }
  return sum ^ (x * 0x2545f4914f6cdd1dULL) ^ static_cast<std::uint64_t>(days.size());
}

StandardizationParams standardize_fit(std::span<const double> series, std::span<const DayIndex> train_days) {
  if (train_days.empty()) throw InvalidInput("standardize_fit: empty training set");
  const double n = static_cast<double>(train_days.size());
  double sum = 0.0;
  for (DayIndex d : train_days) sum += series[d];
  const double mean = sum / n;
  double ss = 0.0;
  for (DayIndex d : train_days) {
    const double dev = series[d] - mean;
    ss += dev * dev;
  }
  double sd = std::sqrt(ss / n);
  // Rounding residue on a constant series is not variance.
  if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) sd = 0.0;
  return {mean, sd, fold_tag(train_days)};
}

}  // namespace geoagg
