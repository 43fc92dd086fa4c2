#pragma once

#include <span>
#include <vector>

#include "geoagg/aggregation.hpp"
#include "geoagg/linear.hpp"

namespace geoagg {

// Per-column centering and scaling fit on training days. Columns that are
// constant on the training days keep scale 1.
struct ColumnScaling {
  std::vector<double> mean;
  std::vector<double> scale;
};

ColumnScaling fit_column_scaling(const FeatureMatrix& features, std::span<const DayIndex> train_days);
void refit_column(ColumnScaling& scaling, const FeatureMatrix& features, std::size_t f,
                  std::span<const DayIndex> train_days);

// Rows are `days`, columns are features after scaling.
Matrix design_matrix(const FeatureMatrix& features, std::span<const DayIndex> days, const ColumnScaling& scaling);
Vector gather_vector(std::span<const double> series, std::span<const DayIndex> days);

}  // namespace geoagg
