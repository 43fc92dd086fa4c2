#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "geoagg/raster.hpp"
#include "geoagg/spatial.hpp"

namespace geoagg {

// k-d tree over grid cell centers embedded as unit vectors in R^3. Chord
// distance is monotone in great-circle distance, so a slightly inflated chord
// query gathers a candidate superset which is then filtered with the same
// haversine test circle_members uses. Results are identical to the brute
// force scan, including the nearest-cell rule for empty circles.
class MembershipIndex {
 public:
  explicit MembershipIndex(const GeoGrid& grid);

  const GeoGrid& grid() const noexcept { return grid_; }
  MembershipMask members(const Circle& circle) const;

  // Number of cell centers whose distance was evaluated by the last query
  // on this thread; exposed for cost tests.
  static std::size_t last_query_visits() noexcept;

 private:
  struct Node {
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void range(std::int32_t node, const std::array<double, 3>& q, double r2, std::vector<std::uint32_t>& out) const;
  void nearest(std::int32_t node, const std::array<double, 3>& q, double& best2) const;

  GeoGrid grid_;
  std::vector<std::array<double, 3>> points_;  // indexed by position in order_
  std::vector<std::uint32_t> order_;           // position -> cell
  std::vector<Node> nodes_;
};

}  // namespace geoagg
