#include "geoagg/design.hpp"

#include "geoagg/errors.hpp"

namespace geoagg {

ColumnScaling fit_column_scaling(const FeatureMatrix& features, std::span<const DayIndex> train_days) {
  ColumnScaling s;
  s.mean.assign(features.n_features, 0.0);
  s.scale.assign(features.n_features, 1.0);
  for (std::size_t f = 0; f < features.n_features; ++f) refit_column(s, features, f, train_days);
  return s;
}

void refit_column(ColumnScaling& scaling, const FeatureMatrix& features, std::size_t f,
                  std::span<const DayIndex> train_days) {
  const auto p = standardize_fit(features.row(f), train_days);
  scaling.mean[f] = p.mean;
  scaling.scale[f] = p.std > 0.0 ? p.std : 1.0;
}

Matrix design_matrix(const FeatureMatrix& features, std::span<const DayIndex> days, const ColumnScaling& scaling) {
  if (scaling.mean.size() != features.n_features) throw InvalidInput("design_matrix: scaling size mismatch");
  Matrix X(static_cast<Eigen::Index>(days.size()), static_cast<Eigen::Index>(features.n_features));
  for (std::size_t f = 0; f < features.n_features; ++f) {
    const auto row = features.row(f);
    const double m = scaling.mean[f];
    const double s = scaling.scale[f];
    for (std::size_t i = 0; i < days.size(); ++i)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = (row[days[i]] - m) / s;
  }
  return X;
}

Vector gather_vector(std::span<const double> series, std::span<const DayIndex> days) {
  Vector v(static_cast<Eigen::Index>(days.size()));
  for (std::size_t i = 0; i < days.size(); ++i) v(static_cast<Eigen::Index>(i)) = series[days[i]];
  return v;
}

}  // namespace geoagg
