#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "geoagg/raster.hpp"

namespace geoagg {

using Rng = std::mt19937_64;

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kMaxRadiusKm = 1000.0;

// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(LatLon a, LatLon b) noexcept;

struct Circle {
  double lat = 0.0;
  double lon = 0.0;
  double radius_km = 0.0;

  LatLon center() const noexcept { return {lat, lon}; }
  bool operator==(const Circle&) const = default;
};

// A constructed feature: the mean of one variable inside one circle.
struct CircleFeature {
  Circle circle;
  std::size_t var = 0;
  bool operator==(const CircleFeature&) const = default;
};

// Throws InvalidInput when radius is outside [0, 1000] km or the center
// lies outside the grid's cell-center bounds.
void validate_circle(const Circle& c, const GeoGrid& grid);

// Sorted flat cell indices (row * cols + col). Never empty.
struct MembershipMask {
  std::vector<std::uint32_t> cells;
  bool operator==(const MembershipMask&) const = default;
};

// Exhaustive scan: cells whose center is within radius_km (closed disc);
// when none qualify, the single nearest cell (lowest index on ties).
MembershipMask circle_members(const Circle& circle, const GeoGrid& grid);

// Reflects at 0 and kMaxRadiusKm until the value lands in range.
double bounce_back(double radius_km) noexcept;

// Destination after travelling `distance_km` from `from` on initial bearing `bearing_rad`.
LatLon destination(LatLon from, double bearing_rad, double distance_km) noexcept;

struct CircleMutation {
  Circle circle;
  bool radius_changed = false;
  double proposed_radius_km = 0.0;  // before bounce-back; meaningful when radius_changed
};

// Gaussian step on one parameter, chosen with equal probability:
//   radius: r + N(0, 0.25 r), bounced back into [0, 1000] km
//   center: moved |N(0, 0.25 r)| km along a uniform bearing, clamped to grid bounds
CircleMutation mutate_circle_detailed(const Circle& circle, Rng& rng, const GeoGrid& grid);
Circle mutate_circle(const Circle& circle, Rng& rng, const GeoGrid& grid);

// Center at a uniformly chosen cell, radius uniform in [0, 1000] km.
Circle random_circle(Rng& rng, const GeoGrid& grid);

// R x R lattice of equal-radius overlapping circles, one feature per
// (variable, circle). Features ordered var-major, then lattice row, then column.
struct FilterGrid {
  std::size_t R = 0;
  double radius_km = 0.0;
  std::vector<CircleFeature> features;
};

FilterGrid build_filter_grid(std::size_t R, const GeoGrid& grid, std::size_t n_vars);

// One radius-0 circle per (variable, cell): the per-unit features of the
// standard methods. Ordered var-major, then cell.
std::vector<CircleFeature> unit_features(const GeoGrid& grid, std::size_t n_vars);

// CSV rows `var,lat,lon,radius_km` with a header line.
void save_circles(const std::vector<CircleFeature>& features, const std::filesystem::path& path);
std::vector<CircleFeature> load_circles(const std::filesystem::path& path);

}  // namespace geoagg
