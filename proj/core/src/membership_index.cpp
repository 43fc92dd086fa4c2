#include "geoagg/membership_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace geoagg {
namespace {

constexpr std::uint32_t kLeafSize = 8;
thread_local std::size_t t_visits = 0;

std::array<double, 3> to_unit(LatLon p) {
  const double phi = p.lat * std::numbers::pi / 180.0;
  const double lambda = p.lon * std::numbers::pi / 180.0;
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
}

double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double box_dist2(const std::array<double, 3>& q, const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = q[k] < lo[k] ? lo[k] - q[k] : (q[k] > hi[k] ? q[k] - hi[k] : 0.0);
    s += d * d;
  }
  return s;
}

// Chord length for a great-circle distance, inflated to absorb rounding
// differences against the haversine test applied afterwards.
double chord_bound(double distance_km) {
  const double half_angle = std::min(distance_km / (2.0 * kEarthRadiusKm), std::numbers::pi / 2.0);
  return 2.0 * std::sin(half_angle) * (1.0 + 1e-9) + 1e-12;
}

}  // namespace

MembershipIndex::MembershipIndex(const GeoGrid& grid) : grid_(grid) {
  order_.resize(grid.cells());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * grid.cells() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(order_.size()));
  points_.resize(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) points_[i] = to_unit(grid.center(order_[i]));
}

std::int32_t MembershipIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo.fill(std::numeric_limits<double>::infinity());
  node.hi.fill(-std::numeric_limits<double>::infinity());
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto p = to_unit(grid_.center(order_[i]));
    for (int k = 0; k < 3; ++k) {
      node.lo[k] = std::min(node.lo[k], p[k]);
      node.hi[k] = std::max(node.hi[k], p[k]);
    }
  }
  if (end - begin > kLeafSize) {
    int axis = 0;
    for (int k = 1; k < 3; ++k)
      if (node.hi[k] - node.lo[k] > node.hi[axis] - node.lo[axis]) axis = k;
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double pa = to_unit(grid_.center(a))[axis];
                       const double pb = to_unit(grid_.center(b))[axis];
                       return pa < pb || (pa == pb && a < b);
                     });
    node.left = build(begin, mid);
    node.right = build(mid, end);
  }
  nodes_[id] = node;
  return id;
}

void MembershipIndex::range(std::int32_t id, const std::array<double, 3>& q, double r2,
                            std::vector<std::uint32_t>& out) const {
  const Node& n = nodes_[id];
  if (box_dist2(q, n.lo, n.hi) > r2) return;
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      ++t_visits;
      if (dist2(q, points_[i]) <= r2) out.push_back(i);
    }
    return;
  }
  range(n.left, q, r2, out);
  range(n.right, q, r2, out);
}

void MembershipIndex::nearest(std::int32_t id, const std::array<double, 3>& q, double& best2) const {
  const Node& n = nodes_[id];
  if (box_dist2(q, n.lo, n.hi) > best2) return;
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      ++t_visits;
      best2 = std::min(best2, dist2(q, points_[i]));
    }
    return;
  }
  const Node& l = nodes_[n.left];
  const Node& r = nodes_[n.right];
  if (box_dist2(q, l.lo, l.hi) <= box_dist2(q, r.lo, r.hi)) {
    nearest(n.left, q, best2);
    nearest(n.right, q, best2);
  } else {
    nearest(n.right, q, best2);
    nearest(n.left, q, best2);
  }
}

MembershipMask MembershipIndex::members(const Circle& circle) const {
  t_visits = 0;
  const LatLon center = circle.center();
  const auto q = to_unit(center);
  const double bound = chord_bound(circle.radius_km);

  std::vector<std::uint32_t> candidates;
  range(0, q, bound * bound, candidates);

  MembershipMask mask;
  mask.cells.reserve(candidates.size());
  for (std::uint32_t pos : candidates)
    if (haversine_km(grid_.center(order_[pos]), center) <= circle.radius_km) mask.cells.push_back(order_[pos]);

  if (mask.cells.empty()) {
    double best2 = std::numeric_limits<double>::infinity();
    nearest(0, q, best2);
    const double nb = std::sqrt(best2) * (1.0 + 1e-9) + 1e-12;
    candidates.clear();
    range(0, q, nb * nb, candidates);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t pick = 0;
    for (std::uint32_t pos : candidates) {
      const std::uint32_t cell = order_[pos];
      const double d = haversine_km(grid_.center(cell), center);
      if (d < best || (d == best && cell < pick)) {
        best = d;
        pick = cell;
      }
    }
    mask.cells.push_back(pick);
    return mask;
  }
  std::sort(mask.cells.begin(), mask.cells.end());
  return mask;
}

std::size_t MembershipIndex::last_query_visits() noexcept { return t_visits; }

}  // namespace geoagg
