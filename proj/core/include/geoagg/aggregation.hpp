#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "geoagg/membership_index.hpp"
#include "geoagg/raster.hpp"
#include "geoagg/spatial.hpp"

namespace geoagg {

// A circle feature bound to one fold: its member cells and the per-cell
// scaling fit on that fold's training days.
struct AggFeature {
  CircleFeature def;
  MembershipMask mask;
  std::vector<StandardizationParams> unit_params;  // parallel to mask.cells
};

AggFeature make_agg_feature(const RasterSeries& raster, const CircleFeature& def, std::span<const DayIndex> train_days,
                            const MembershipIndex* index = nullptr);

// Reference path: standardize each member cell on the fly, then average.
std::vector<double> aggregate(const RasterSeries& raster, const AggFeature& feature, std::span<const DayIndex> days);

// Every (var, cell) series standardized with training-day parameters of one
// fold, stored var-major, then cell, then day.
class StandardizedCube {
 public:
  StandardizedCube(const RasterSeries& raster, std::span<const DayIndex> train_days);

  std::size_t n_days() const noexcept { return n_days_; }
  std::size_t n_cells() const noexcept { return n_cells_; }
  std::size_t n_vars() const noexcept { return n_vars_; }
  std::uint64_t provenance() const noexcept { return provenance_; }

  const StandardizationParams& params(std::size_t var, std::size_t cell) const noexcept {
    return params_[var * n_cells_ + cell];
  }
  std::span<const double> unit_series(std::size_t var, std::size_t cell) const noexcept {
    return {data_.data() + (var * n_cells_ + cell) * n_days_, n_days_};
  }

  // Mean over mask cells of the standardized series, for every day.
  void aggregate_all_days(const MembershipMask& mask, std::size_t var, std::span<double> out) const;

 private:
  std::size_t n_days_ = 0;
  std::size_t n_cells_ = 0;
  std::size_t n_vars_ = 0;
  std::size_t n_cols_ = 1;
  std::uint64_t provenance_ = 0;
  std::vector<StandardizationParams> params_;
  std::vector<double> data_;
  std::vector<double> row_prefix_;  // (var, row, col + 1, day) running sums along rows

  const double* prefix(std::size_t var, std::size_t row, std::size_t col) const noexcept;
};

// Computes full-length (all days) aggregated series for circle features of
// one fold. The indexed engine uses the membership index and the cube; the
// naive engine scans every cell and standardizes raw values on the fly.
class AggregationEngine {
 public:
  enum class Strategy { Indexed, Naive };

  AggregationEngine(const RasterSeries& raster, std::span<const DayIndex> train_days,
                    Strategy strategy = Strategy::Indexed);

  const GeoGrid& grid() const noexcept { return raster_->grid(); }
  const RasterSeries& raster() const noexcept { return *raster_; }
  const StandardizedCube& cube() const noexcept { return cube_; }
  const MembershipIndex& index() const noexcept { return index_; }
  std::span<const DayIndex> train_days() const noexcept { return train_days_; }
  Strategy strategy() const noexcept { return strategy_; }

  MembershipMask members(const Circle& c) const;
  std::vector<double> series(const CircleFeature& f) const;

 private:
  const RasterSeries* raster_;
  std::vector<DayIndex> train_days_;
  Strategy strategy_;
  MembershipIndex index_;
  StandardizedCube cube_;
};

// Row-major feature x day matrix of aggregated series.
struct FeatureMatrix {
  std::size_t n_features = 0;
  std::size_t n_days = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t f) const noexcept { return {data.data() + f * n_days, n_days}; }
};

FeatureMatrix build_feature_matrix(const AggregationEngine& engine, std::span<const CircleFeature> features);

}  // namespace geoagg
