#include "geoagg/spatial.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "geoagg/errors.hpp"

namespace geoagg {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

Circle clamp_to_grid(Circle c, const GeoGrid& grid) {
  c.lat = std::clamp(c.lat, grid.lat_min(), grid.lat_max());
  c.lon = std::clamp(c.lon, grid.lon_min(), grid.lon_max());
  return c;
}

}  // namespace

double haversine_km(LatLon a, LatLon b) noexcept {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double s_lat = std::sin((phi2 - phi1) / 2.0);
  const double s_lon = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
  double h = s_lat * s_lat + std::cos(phi1) * std::cos(phi2) * s_lon * s_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

void validate_circle(const Circle& c, const GeoGrid& grid) {
  if (!(c.radius_km >= 0.0 && c.radius_km <= kMaxRadiusKm))
    throw InvalidInput("circle radius must lie in [0, 1000] km, got " + format_double(c.radius_km));
  if (!(c.lat >= grid.lat_min() && c.lat <= grid.lat_max() && c.lon >= grid.lon_min() && c.lon <= grid.lon_max()))
    throw InvalidInput("circle center (" + format_double(c.lat) + ", " + format_double(c.lon) +
                       ") outside grid bounds");
}

MembershipMask circle_members(const Circle& circle, const GeoGrid& grid) {
  MembershipMask mask;
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t nearest = 0;
  const LatLon center = circle.center();
  for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
    const double d = haversine_km(grid.center(cell), center);
    if (d <= circle.radius_km) mask.cells.push_back(static_cast<std::uint32_t>(cell));
    if (d < best) {
      best = d;
      nearest = static_cast<std::uint32_t>(cell);
    }
  }
  if (mask.cells.empty()) mask.cells.push_back(nearest);
  return mask;
}

double bounce_back(double r) noexcept {
  if (!std::isfinite(r)) return kMaxRadiusKm;
  // Reflection on [0, M] is periodic with period 2M.
  constexpr double period = 2.0 * kMaxRadiusKm;
  if (r < 0.0 || r > kMaxRadiusKm) {
    if (std::abs(r) > 4.0 * period) r = std::fmod(r, period);
    while (r < 0.0 || r > kMaxRadiusKm) {
      if (r > kMaxRadiusKm) r = kMaxRadiusKm - (r - kMaxRadiusKm);
      if (r < 0.0) r = -r;
    }
  }
  return r;
}

LatLon destination(LatLon from, double bearing_rad, double distance_km) noexcept {
  const double delta = distance_km / kEarthRadiusKm;
  const double phi1 = from.lat * kDegToRad;
  const double lambda1 = from.lon * kDegToRad;
  const double sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad);
  const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
  const double lambda2 = lambda1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                                              std::cos(delta) - std::sin(phi1) * sin_phi2);
  double lon = lambda2 * kRadToDeg;
  lon = std::fmod(lon + 540.0, 360.0) - 180.0;
  return {phi2 * kRadToDeg, lon};
}

CircleMutation mutate_circle_detailed(const Circle& circle, Rng& rng, const GeoGrid& grid) {
  CircleMutation out{circle, false, circle.radius_km};
  const double sigma = 0.25 * circle.radius_km;
  std::bernoulli_distribution pick_radius(0.5);
  std::normal_distribution<double> step(0.0, 1.0);
  if (pick_radius(rng)) {
    out.radius_changed = true;
    out.proposed_radius_km = circle.radius_km + sigma * step(rng);
    out.circle.radius_km = bounce_back(out.proposed_radius_km);
  } else {
    std::uniform_real_distribution<double> bearing(0.0, 2.0 * std::numbers::pi);
    const double distance = std::abs(sigma * step(rng));
    const LatLon moved = destination(circle.center(), bearing(rng), distance);
    out.circle = clamp_to_grid({moved.lat, moved.lon, circle.radius_km}, grid);
  }
  return out;
}

Circle mutate_circle(const Circle& circle, Rng& rng, const GeoGrid& grid) {
  return mutate_circle_detailed(circle, rng, grid).circle;
}

Circle random_circle(Rng& rng, const GeoGrid& grid) {
  std::uniform_int_distribution<std::size_t> cell(0, grid.cells() - 1);
  std::uniform_real_distribution<double> radius(0.0, kMaxRadiusKm);
  const LatLon c = grid.center(cell(rng));
  return {c.lat, c.lon, radius(rng)};
}

FilterGrid build_filter_grid(std::size_t R, const GeoGrid& grid, std::size_t n_vars) {
  if (R < 1 || R > std::min(grid.rows(), grid.cols()))
    throw InvalidInput("build_filter_grid: R must lie in [1, min(rows, cols)], got " + std::to_string(R));
  if (n_vars == 0) throw InvalidInput("build_filter_grid: n_vars must be >= 1");

  // Lattice spans the cell-edge extent; centers sit at (i + 0.5) / R fractions.
  const double lat_lo = grid.lat0() - grid.lat_step() / 2.0;
  const double lon_lo = grid.lon0() - grid.lon_step() / 2.0;
  const double cell_lat = static_cast<double>(grid.rows()) * grid.lat_step() / static_cast<double>(R);
  const double cell_lon = static_cast<double>(grid.cols()) * grid.lon_step() / static_cast<double>(R);

  std::vector<LatLon> centers;
  centers.reserve(R * R);
  double radius = 0.0;
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < R; ++j) {
      const LatLon c{lat_lo + (static_cast<double>(i) + 0.5) * cell_lat,
                     lon_lo + (static_cast<double>(j) + 0.5) * cell_lon};
      centers.push_back(c);
      // Half the lattice-cell diagonal, measured to the farthest corner on the sphere.
      for (double dl : {-0.5, 0.5})
        for (double dn : {-0.5, 0.5})
          radius = std::max(radius, haversine_km(c, {c.lat + dl * cell_lat, c.lon + dn * cell_lon}));
    }
  }

  FilterGrid fg;
  fg.R = R;
  fg.radius_km = radius;
  fg.features.reserve(n_vars * R * R);
  for (std::size_t v = 0; v < n_vars; ++v)
    for (const LatLon& c : centers) fg.features.push_back({{c.lat, c.lon, radius}, v});
  return fg;
}

std::vector<CircleFeature> unit_features(const GeoGrid& grid, std::size_t n_vars) {
  std::vector<CircleFeature> out;
  out.reserve(n_vars * grid.cells());
  for (std::size_t v = 0; v < n_vars; ++v)
    for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
      const LatLon c = grid.center(cell);
      out.push_back({{c.lat, c.lon, 0.0}, v});
    }
  return out;
}

void save_circles(const std::vector<CircleFeature>& features, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("circles: cannot write " + path.string());
  out << "var,lat,lon,radius_km\n";
  for (const auto& f : features)
    out << f.var << ',' << format_double(f.circle.lat) << ',' << format_double(f.circle.lon) << ','
        << format_double(f.circle.radius_km) << '\n';
}

std::vector<CircleFeature> load_circles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("circles: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "var,lat,lon,radius_km")
    throw FormatError("circles: expected header `var,lat,lon,radius_km` in " + path.string());
  std::vector<CircleFeature> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CircleFeature f;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto r = std::from_chars(p, end, f.var);
    bool ok = r.ec == std::errc{} && r.ptr != end && *r.ptr == ',';
    for (double* field : {&f.circle.lat, &f.circle.lon, &f.circle.radius_km}) {
      if (!ok) break;
      r = std::from_chars(r.ptr + 1, end, *field);
      ok = r.ec == std::errc{} && (field == &f.circle.radius_km ? r.ptr == end : (r.ptr != end && *r.ptr == ','));
    }
    if (!ok) throw FormatError("circles: malformed row: " + line);
    out.push_back(f);
  }
  return out;
}

}  // namespace geoagg
