#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoagg/raster.hpp"
#include "geoagg/spatial.hpp"

namespace geoagg {

// Generating formulas over A_k, the raw mean of variable k inside planted circle k.
//   "identity"     s = A_1
//   "sum"          s = A_1 + ... + A_m
//   "product_sum"  s = 3 A_1 A_2 + 0.5 A_3
std::size_t formula_arity(const std::string& formula_id);  // 0 for "sum" (any count)
double planted_formula(const std::string& formula_id, std::span<const double> aggregates);

struct SyntheticConfig {
  std::size_t rows = 32;
  std::size_t cols = 32;
  double lat0 = 30.0;
  double lon0 = 80.0;
  double lat_step = 0.25;
  double lon_step = 0.25;
  std::size_t n_days = 400;
  std::vector<Year> years{2003, 2004, 2005, 2006};  // days split evenly, in order
  std::size_t n_vars = 3;
  std::size_t smoothing = 5;          // S x S box filter width
  double seasonal_amplitude = 0.5;    // shared in-season hump added to every cell
  std::vector<CircleFeature> planted;  // empty: defaults placed by default_planted()
  std::string formula = "product_sum";
  double noise_std = 0.1;
  bool noise_relative = true;  // noise_std scales std(signal) when true
};

// Three well-separated circles (one per variable) for the configured grid.
std::vector<CircleFeature> default_planted(const SyntheticConfig& config);

// 113 x 113 x 3 over 1935 days and nine years 2003-2011.
SyntheticConfig paper_shape_config();

struct PlantedTruth {
  std::vector<CircleFeature> circles;
  std::string formula_id;
  double noise_std = 0.0;  // absolute
};

struct SyntheticDataset {
  RasterSeries raster;
  ResponseSeries response;
  PlantedTruth truth;
};

// Deterministic in (config, seed). Raster values are rounded to float32 so
// the dataset survives a save/load round trip unchanged.
SyntheticDataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

// Year label for every day under the even split.
std::vector<Year> split_years(std::size_t n_days, std::span<const Year> years);

void to_json(nlohmann::json& j, const SyntheticConfig& c);
void from_json(const nlohmann::json& j, SyntheticConfig& c);  // throws ConfigError
void to_json(nlohmann::json& j, const PlantedTruth& t);
void from_json(const nlohmann::json& j, PlantedTruth& t);

}  // namespace geoagg
