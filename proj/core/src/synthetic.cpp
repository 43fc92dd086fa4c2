#include "geoagg/synthetic.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "geoagg/errors.hpp"

namespace geoagg {

std::size_t formula_arity(const std::string& formula_id) {
  if (formula_id == "identity") return 1;
  if (formula_id == "product_sum") return 3;
  if (formula_id == "sum") return 0;
  throw ConfigError("unknown planted formula `" + formula_id + "`");
}

double planted_formula(const std::string& formula_id, std::span<const double> a) {
  if (formula_id == "identity") return a[0];
  if (formula_id == "product_sum") return 3.0 * a[0] * a[1] + 0.5 * a[2];
  if (formula_id == "sum") {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
  }
  throw ConfigError("unknown planted formula `" + formula_id + "`");
}

std::vector<CircleFeature> default_planted(const SyntheticConfig& c) {
  const auto at = [&](double fr, double fc) {
    return LatLon{c.lat0 + std::round(fr * static_cast<double>(c.rows - 1)) * c.lat_step,
                  c.lon0 + std::round(fc * static_cast<double>(c.cols - 1)) * c.lon_step};
  };
  const double cell_km = c.lat_step * std::numbers::pi / 180.0 * kEarthRadiusKm;
  const LatLon p0 = at(0.3, 0.7);
  const LatLon p1 = at(0.7, 0.3);
  const LatLon p2 = at(0.5, 0.5);
  std::vector<CircleFeature> out{{{p0.lat, p0.lon, 4.0 * cell_km}, 0},
                                 {{p1.lat, p1.lon, 4.0 * cell_km}, 1 % c.n_vars},
                                 {{p2.lat, p2.lon, 3.0 * cell_km}, 2 % c.n_vars}};
  return out;
}

SyntheticConfig paper_shape_config() {
  SyntheticConfig c;
  c.rows = 113;
  c.cols = 113;
  c.lat0 = 30.0;
  c.lon0 = 75.0;
  c.lat_step = 0.1;
  c.lon_step = 0.1;
  c.n_days = 1935;
  c.years.clear();
  for (Year y = 2003; y <= 2011; ++y) c.years.push_back(y);
  return c;
}

std::vector<Year> split_years(std::size_t n_days, std::span<const Year> years) {
  std::vector<Year> out(n_days);
  for (std::size_t d = 0; d < n_days; ++d) out[d] = years[d * years.size() / n_days];
  return out;
}

SyntheticDataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.n_days == 0) throw ConfigError("generator: n_days must be >= 1");
  if (config.years.empty() || config.years.size() > config.n_days)
    throw ConfigError("generator: need between 1 and n_days year labels");
  for (std::size_t i = 1; i < config.years.size(); ++i)
    if (config.years[i] <= config.years[i - 1]) throw ConfigError("generator: years must be strictly increasing");
  if (config.n_vars == 0) throw ConfigError("generator: n_vars must be >= 1");
  if (config.smoothing == 0) throw ConfigError("generator: smoothing must be >= 1");
  if (!(config.noise_std >= 0.0)) throw ConfigError("generator: noise_std must be >= 0");

  GeoGrid grid;
  try {
    grid = GeoGrid(config.rows, config.cols, config.lat0, config.lon0, config.lat_step, config.lon_step);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("generator: ") + e.what());
  }

  PlantedTruth truth;
  truth.formula_id = config.formula;
  truth.circles = config.planted.empty() ? default_planted(config) : config.planted;
  const std::size_t arity = formula_arity(config.formula);
  if (arity != 0 && truth.circles.size() < arity)
    throw ConfigError("generator: formula `" + config.formula + "` needs " + std::to_string(arity) + " circles");
  if (arity != 0) truth.circles.resize(arity);
  if (truth.circles.empty()) throw ConfigError("generator: at least one planted circle required");

  for (const auto& f : truth.circles) {
    if (f.var >= config.n_vars) throw ConfigError("generator: planted circle references a missing variable");
    if (!(f.circle.radius_km >= 0.0 && f.circle.radius_km <= kMaxRadiusKm))
      throw ConfigError("generator: planted radius outside [0, 1000] km");
    const bool center_inside = f.circle.lat >= grid.lat_min() && f.circle.lat <= grid.lat_max() &&
                               f.circle.lon >= grid.lon_min() && f.circle.lon <= grid.lon_max();
    bool reaches_cell = false;
    for (std::size_t cell = 0; cell < grid.cells() && !reaches_cell; ++cell)
      reaches_cell = haversine_km(grid.center(cell), f.circle.center()) <= f.circle.radius_km;
    if (!center_inside && !reaches_cell) throw ConfigError("generator: planted circle lies entirely outside the grid");
  }

  const std::vector<Year> day_year = split_years(config.n_days, config.years);

  Rng rng(seed);
  std::normal_distribution<double> white(0.0, 1.0);
  const std::size_t S = config.smoothing;
  const std::size_t prow = config.rows + S - 1;
  const std::size_t pcol = config.cols + S - 1;
  const std::size_t cells = grid.cells();
  std::vector<double> values(config.n_days * cells * config.n_vars);
  std::vector<double> noise(prow * pcol);
  std::vector<double> colsum(prow * config.cols);

  std::size_t year_start = 0;
  for (std::size_t d = 0; d < config.n_days; ++d) {
    if (d > 0 && day_year[d] != day_year[d - 1]) year_start = d;
    std::size_t year_len = 0;
    while (year_start + year_len < config.n_days && day_year[year_start + year_len] == day_year[d]) ++year_len;
    const double t = (static_cast<double>(d - year_start) + 0.5) / static_cast<double>(year_len);
    const double seasonal = config.seasonal_amplitude * std::sin(std::numbers::pi * t);

    for (std::size_t v = 0; v < config.n_vars; ++v) {
      for (double& x : noise) x = white(rng);
      // Box filter via separable sums; scaled by S to keep unit variance.
      for (std::size_t r = 0; r < prow; ++r)
        for (std::size_t c = 0; c < config.cols; ++c) {
          double s = 0.0;
          for (std::size_t k = 0; k < S; ++k) s += noise[r * pcol + c + k];
          colsum[r * config.cols + c] = s;
        }
      for (std::size_t r = 0; r < config.rows; ++r)
        for (std::size_t c = 0; c < config.cols; ++c) {
          double s = 0.0;
          for (std::size_t k = 0; k < S; ++k) s += colsum[(r + k) * config.cols + c];
          const double field = seasonal + s / static_cast<double>(S);
          values[(d * cells + r * config.cols + c) * config.n_vars + v] = static_cast<float>(field);
        }
    }
  }

  RasterSeries raster(grid, config.n_vars, day_year, std::move(values));

  std::vector<MembershipMask> masks;
  for (const auto& f : truth.circles) masks.push_back(circle_members(f.circle, grid));
  std::vector<double> signal(config.n_days);
  std::vector<double> agg(truth.circles.size());
  for (std::size_t d = 0; d < config.n_days; ++d) {
    for (std::size_t k = 0; k < truth.circles.size(); ++k) {
      double s = 0.0;
      for (std::uint32_t cell : masks[k].cells) s += raster.at(d, cell, truth.circles[k].var);
      agg[k] = s / static_cast<double>(masks[k].cells.size());
    }
    signal[d] = planted_formula(config.formula, agg);
  }

  double noise_abs = config.noise_std;
  if (config.noise_relative) {
    double mean = 0.0;
    for (double s : signal) mean += s;
    mean /= static_cast<double>(signal.size());
    double ss = 0.0;
    for (double s : signal) ss += (s - mean) * (s - mean);
    noise_abs = config.noise_std * std::sqrt(ss / static_cast<double>(signal.size()));
  }
  truth.noise_std = noise_abs;

  ResponseSeries response;
  response.day_year = day_year;
  response.values = signal;
  if (noise_abs > 0.0) {
    std::normal_distribution<double> eps(0.0, noise_abs);
    for (double& s : response.values) s += eps(rng);
  }
  return {std::move(raster), std::move(response), std::move(truth)};
}

namespace {

nlohmann::json circle_feature_json(const CircleFeature& f) {
  return {{"var", f.var}, {"lat", f.circle.lat}, {"lon", f.circle.lon}, {"radius_km", f.circle.radius_km}};
}

CircleFeature circle_feature_from(const nlohmann::json& j) {
  CircleFeature f;
  f.var = j.at("var").get<std::size_t>();
  f.circle.lat = j.at("lat").get<double>();
  f.circle.lon = j.at("lon").get<double>();
  f.circle.radius_km = j.at("radius_km").get<double>();
  return f;
}

}  // namespace

void to_json(nlohmann::json& j, const SyntheticConfig& c) {
  j = {{"rows", c.rows},
       {"cols", c.cols},
       {"lat0", c.lat0},
       {"lon0", c.lon0},
       {"lat_step", c.lat_step},
       {"lon_step", c.lon_step},
       {"n_days", c.n_days},
       {"years", c.years},
       {"n_vars", c.n_vars},
       {"smoothing", c.smoothing},
       {"seasonal_amplitude", c.seasonal_amplitude},
       {"formula", c.formula},
       {"noise_std", c.noise_std},
       {"noise_relative", c.noise_relative}};
  auto planted = nlohmann::json::array();
  for (const auto& f : c.planted) planted.push_back(circle_feature_json(f));
  j["planted"] = planted;
}

void from_json(const nlohmann::json& j, SyntheticConfig& c) {
  try {
    if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
    SyntheticConfig d;
    c.rows = j.value("rows", d.rows);
    c.cols = j.value("cols", d.cols);
    c.lat0 = j.value("lat0", d.lat0);
    c.lon0 = j.value("lon0", d.lon0);
    c.lat_step = j.value("lat_step", d.lat_step);
    c.lon_step = j.value("lon_step", d.lon_step);
    c.n_days = j.value("n_days", d.n_days);
    c.years = j.value("years", d.years);
    c.n_vars = j.value("n_vars", d.n_vars);
    c.smoothing = j.value("smoothing", d.smoothing);
    c.seasonal_amplitude = j.value("seasonal_amplitude", d.seasonal_amplitude);
    c.formula = j.value("formula", d.formula);
    c.noise_std = j.value("noise_std", d.noise_std);
    c.noise_relative = j.value("noise_relative", d.noise_relative);
    c.planted.clear();
    if (j.contains("planted"))
      for (const auto& p : j.at("planted")) c.planted.push_back(circle_feature_from(p));
    formula_arity(c.formula);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generator config: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const PlantedTruth& t) {
  auto circles = nlohmann::json::array();
  for (const auto& f : t.circles) circles.push_back(circle_feature_json(f));
  j = {{"circles", circles}, {"formula_id", t.formula_id}, {"noise_std", t.noise_std}};
}

void from_json(const nlohmann::json& j, PlantedTruth& t) {
  try {
    t.circles.clear();
    for (const auto& p : j.at("circles")) t.circles.push_back(circle_feature_from(p));
    t.formula_id = j.at("formula_id").get<std::string>();
    t.noise_std = j.at("noise_std").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("planted truth: ") + e.what());
  }
}

}  // namespace geoagg
