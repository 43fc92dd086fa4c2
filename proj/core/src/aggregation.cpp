#include "geoagg/aggregation.hpp"

#include <algorithm>

#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

std::vector<double> unit_raw_series(const RasterSeries& raster, std::size_t cell, std::size_t var) {
  std::vector<double> s(raster.n_days());
  for (DayIndex d = 0; d < s.size(); ++d) s[d] = raster.at(d, cell, var);
  return s;
}

}  // namespace

AggFeature make_agg_feature(const RasterSeries& raster, const CircleFeature& def, std::span<const DayIndex> train_days,
                            const MembershipIndex* index) {
  if (def.var >= raster.n_vars()) throw InvalidInput("make_agg_feature: variable index out of range");
  AggFeature f;
  f.def = def;
  f.mask = index ? index->members(def.circle) : circle_members(def.circle, raster.grid());
  f.unit_params.reserve(f.mask.cells.size());
  for (std::uint32_t cell : f.mask.cells)
    f.unit_params.push_back(standardize_fit(unit_raw_series(raster, cell, def.var), train_days));
  return f;
}

std::vector<double> aggregate(const RasterSeries& raster, const AggFeature& feature, std::span<const DayIndex> days) {
  std::vector<double> out(days.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(feature.mask.cells.size());
  for (std::size_t k = 0; k < feature.mask.cells.size(); ++k) {
    const std::uint32_t cell = feature.mask.cells[k];
    const auto& p = feature.unit_params[k];
    for (std::size_t i = 0; i < days.size(); ++i)
      out[i] += standardize_apply(raster.at(days[i], cell, feature.def.var), p);
  }
  for (double& v : out) v *= inv;
  return out;
}

StandardizedCube::StandardizedCube(const RasterSeries& raster, std::span<const DayIndex> train_days)
    : n_days_(raster.n_days()),
      n_cells_(raster.grid().cells()),
      n_vars_(raster.n_vars()),
      provenance_(fold_tag(train_days)) {
  params_.resize(n_vars_ * n_cells_);
  data_.resize(n_vars_ * n_cells_ * n_days_);
  std::vector<double> series(n_days_);
  for (std::size_t v = 0; v < n_vars_; ++v) {
    for (std::size_t cell = 0; cell < n_cells_; ++cell) {
      for (DayIndex d = 0; d < n_days_; ++d) series[d] = raster.at(d, cell, v);
      const auto p = standardize_fit(series, train_days);
      params_[v * n_cells_ + cell] = p;
      double* dst = data_.data() + (v * n_cells_ + cell) * n_days_;
      for (DayIndex d = 0; d < n_days_; ++d) dst[d] = standardize_apply(series[d], p);
    }
  }
  // Running sums along each grid row, so a run of adjacent member cells
  // costs one subtraction per day.
  n_cols_ = raster.grid().cols();
  const std::size_t rows = raster.grid().rows();
  row_prefix_.assign(n_vars_ * rows * (n_cols_ + 1) * n_days_, 0.0);
  for (std::size_t v = 0; v < n_vars_; ++v)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < n_cols_; ++c) {
        const double* src = data_.data() + (v * n_cells_ + r * n_cols_ + c) * n_days_;
        const double* prev = prefix(v, r, c);
        double* dst = row_prefix_.data() + ((v * rows + r) * (n_cols_ + 1) + c + 1) * n_days_;
        for (std::size_t d = 0; d < n_days_; ++d) dst[d] = prev[d] + src[d];
      }
}

const double* StandardizedCube::prefix(std::size_t var, std::size_t row, std::size_t col) const noexcept {
  const std::size_t rows = n_cells_ / n_cols_;
  return row_prefix_.data() + ((var * rows + row) * (n_cols_ + 1) + col) * n_days_;
}

void StandardizedCube::aggregate_all_days(const MembershipMask& mask, std::size_t var, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const auto& cells = mask.cells;
  for (std::size_t i = 0; i < cells.size();) {
    // Maximal run of consecutive cells within one row.
    std::size_t j = i + 1;
    while (j < cells.size() && cells[j] == cells[j - 1] + 1 && cells[j] % n_cols_ != 0) ++j;
    if (j - i < 3) {
      for (std::size_t k = i; k < j; ++k) {
        const double* src = data_.data() + (var * n_cells_ + cells[k]) * n_days_;
        for (std::size_t d = 0; d < n_days_; ++d) out[d] += src[d];
      }
    } else {
      const std::size_t row = cells[i] / n_cols_;
      const double* lo = prefix(var, row, cells[i] % n_cols_);
      const double* hi = prefix(var, row, cells[j - 1] % n_cols_ + 1);
      for (std::size_t d = 0; d < n_days_; ++d) out[d] += hi[d] - lo[d];
    }
    i = j;
  }
  const double inv = 1.0 / static_cast<double>(mask.cells.size());
  for (double& v : out) v *= inv;
}

AggregationEngine::AggregationEngine(const RasterSeries& raster, std::span<const DayIndex> train_days,
                                     Strategy strategy)
    : raster_(&raster),
      train_days_(train_days.begin(), train_days.end()),
      strategy_(strategy),
      index_(raster.grid()),
      cube_(raster, train_days) {}

MembershipMask AggregationEngine::members(const Circle& c) const {
  return strategy_ == Strategy::Indexed ? index_.members(c) : circle_members(c, raster_->grid());
}

std::vector<double> AggregationEngine::series(const CircleFeature& f) const {
  if (f.var >= raster_->n_vars()) throw InvalidInput("aggregation: variable index out of range");
  if (strategy_ == Strategy::Naive) {
    const AggFeature feature = make_agg_feature(*raster_, f, train_days_, nullptr);
    std::vector<DayIndex> all(raster_->n_days());
    for (DayIndex d = 0; d < all.size(); ++d) all[d] = d;
    return aggregate(*raster_, feature, all);
  }
  std::vector<double> out(raster_->n_days());
  cube_.aggregate_all_days(index_.members(f.circle), f.var, out);
  return out;
}

FeatureMatrix build_feature_matrix(const AggregationEngine& engine, std::span<const CircleFeature> features) {
  FeatureMatrix m;
  m.n_features = features.size();
  m.n_days = engine.raster().n_days();
  m.data.resize(m.n_features * m.n_days);
  for (std::size_t f = 0; f < features.size(); ++f) {
    std::span<double> dst(m.data.data() + f * m.n_days, m.n_days);
    engine.cube().aggregate_all_days(engine.members(features[f].circle), features[f].var, dst);
  }
  return m;
}

}  // namespace geoagg
