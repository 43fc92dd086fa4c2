#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "geoagg/gp/evolution.hpp"
#include "geoagg/linear.hpp"
#include "geoagg/raster.hpp"
#include "geoagg/spatial.hpp"

namespace geoagg {

// Grid-shaped scores for one variable. Cells no feature covers are unused,
// which is distinct from a score of zero.
struct ImportanceMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t var = 0;
  std::vector<double> value;   // row-major; 0 where unused
  std::vector<std::uint8_t> used;

  bool is_used(std::size_t cell) const noexcept { return used[cell] != 0; }
};

// Per cell: mean |coefficient| over every (model, feature) pair whose circle
// covers the cell. `features[m]` lists the columns of `models[m]`. One map
// per variable.
std::vector<ImportanceMap> importance_linear(std::span<const LinearModel> models,
                                             std::span<const std::vector<CircleFeature>> features,
                                             const GeoGrid& grid, std::size_t n_vars);

// Per cell: mean (1 - error) over front members referencing at least one
// feature of that variable covering the cell. Feature-reference terminals
// resolve through `feature_defs`; aggregate terminals carry their own circle.
std::vector<ImportanceMap> importance_gp(std::span<const gp::GpIndividual> front,
                                         std::span<const CircleFeature> feature_defs, const GeoGrid& grid,
                                         std::size_t n_vars);

// `rows` lines of `cols` comma-separated values, `NA` for unused cells.
void save_heatmap_csv(const ImportanceMap& map, const std::filesystem::path& path);

}  // namespace geoagg
