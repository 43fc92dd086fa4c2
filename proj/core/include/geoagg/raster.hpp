#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace geoagg {

using DayIndex = std::size_t;
using Year = std::int32_t;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

// Regular latitude/longitude grid. Row r sits at lat0 + r * lat_step and
// column c at lon0 + c * lon_step; coordinates are cell centers.
class GeoGrid {
 public:
  GeoGrid() = default;
  GeoGrid(std::size_t rows, std::size_t cols, double lat0, double lon0, double lat_step,
          double lon_step);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t cells() const noexcept { return rows_ * cols_; }
  double lat0() const noexcept { return lat0_; }
  double lon0() const noexcept { return lon0_; }
  double lat_step() const noexcept { return lat_step_; }
  double lon_step() const noexcept { return lon_step_; }

  double lat_of(std::size_t row) const noexcept { return lat0_ + static_cast<double>(row) * lat_step_; }
  double lon_of(std::size_t col) const noexcept { return lon0_ + static_cast<double>(col) * lon_step_; }
  LatLon center(std::size_t cell) const noexcept { return {lat_of(cell / cols_), lon_of(cell % cols_)}; }

  double lat_min() const noexcept { return lat0_; }
  double lat_max() const noexcept { return lat_of(rows_ - 1); }
  double lon_min() const noexcept { return lon0_; }
  double lon_max() const noexcept { return lon_of(cols_ - 1); }

  // Fractional (row, col) of a coordinate; used for cell-distance reporting.
  double row_of(double lat) const noexcept { return (lat - lat0_) / lat_step_; }
  double col_of(double lon) const noexcept { return (lon - lon0_) / lon_step_; }

  bool operator==(const GeoGrid&) const = default;

 private:
  std::size_t rows_ = 1;
  std::size_t cols_ = 1;
  double lat0_ = 0.0;
  double lon0_ = 0.0;
  double lat_step_ = 1.0;
  double lon_step_ = 1.0;
};

// Daily gridded observations, laid out (day, row, col, var) row-major.
class RasterSeries {
 public:
  RasterSeries() = default;
  RasterSeries(GeoGrid grid, std::size_t n_vars, std::vector<Year> day_year, std::vector<double> values);

  const GeoGrid& grid() const noexcept { return grid_; }
  std::size_t n_days() const noexcept { return day_year_.size(); }
  std::size_t n_vars() const noexcept { return n_vars_; }
  std::span<const Year> day_year() const noexcept { return day_year_; }
  std::span<const double> values() const noexcept { return values_; }

  std::size_t offset(DayIndex day, std::size_t cell, std::size_t var) const noexcept {
    return (day * grid_.cells() + cell) * n_vars_ + var;
  }
  double at(DayIndex day, std::size_t cell, std::size_t var) const noexcept {
    return values_[offset(day, cell, var)];
  }
  double at(DayIndex day, std::size_t row, std::size_t col, std::size_t var) const noexcept {
    return at(day, row * grid_.cols() + col, var);
  }

  bool operator==(const RasterSeries&) const = default;

 private:
  GeoGrid grid_;
  std::size_t n_vars_ = 0;
  std::vector<Year> day_year_;
  std::vector<double> values_;
};

struct ResponseSeries {
  std::vector<double> values;
  std::vector<Year> day_year;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const ResponseSeries&) const = default;
};

// Throws InvalidInput unless response and raster share day count and labels.
void check_paired(const RasterSeries& raster, const ResponseSeries& response);

struct StandardizationParams {
  double mean = 0.0;
  double std = 0.0;
  // Hash of the day set the parameters were fit on (see fold_tag).
  std::uint64_t provenance = 0;
};

struct FoldSpec {
  Year test_year = 0;
  std::vector<DayIndex> train_days;
  std::vector<DayIndex> test_days;
};

// One leave-one-year-out fold per distinct year, in ascending year order.
std::vector<FoldSpec> make_folds(std::span<const Year> day_year);

// Order-independent hash of a day set; stamps StandardizationParams so a
// harness can prove test-day scaling used training-day parameters.
std::uint64_t fold_tag(std::span<const DayIndex> days);

// Population (divisor n) mean and standard deviation over `train_days`.
StandardizationParams standardize_fit(std::span<const double> series, std::span<const DayIndex> train_days);

// (value - mean) / std, or 0 for a constant feature.
inline double standardize_apply(double value, const StandardizationParams& p) noexcept {
  return p.std > 0.0 ? (value - p.mean) / p.std : 0.0;
}

}  // namespace geoagg
