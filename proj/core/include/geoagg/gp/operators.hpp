#pragma once

#include <cstddef>

#include "geoagg/aggregation.hpp"
#include "geoagg/gp/tree.hpp"
#include "geoagg/spatial.hpp"

namespace geoagg::gp {

// Source of random primitives. In feature mode terminals are references to
// `n_features` precomputed columns; in aggregate mode they are fresh circles
// drawn like the wrapper's initialization and aggregated through `engine`.
// Ephemeral constants (uniform in [-1, 1]) carry the weight of one feature
// (feature mode) or one variable (aggregate mode).
class PrimitiveFactory {
 public:
  static PrimitiveFactory features(std::size_t n_features);
  static PrimitiveFactory aggregates(const AggregationEngine& engine);

  bool aggregate_mode() const noexcept { return engine_ != nullptr; }
  const AggregationEngine* engine() const noexcept { return engine_; }

  Node terminal(Rng& rng) const;
  Node function(Rng& rng) const;
  std::shared_ptr<const AggTerminal> make_aggregate(const CircleFeature& def) const;

  // Every leaf at depth `height`.
  Tree full(std::size_t height, Rng& rng) const;
  // Function root, then function or terminal with equal odds until `height`.
  Tree grow(std::size_t height, Rng& rng) const;

 private:
  PrimitiveFactory() = default;
  void build(Tree& out, std::size_t depth, std::size_t height, bool full, Rng& rng) const;

  std::size_t n_features_ = 0;
  const AggregationEngine* engine_ = nullptr;
};

// Ramped half-and-half: individual i uses bucket i % 10, alternating full and
// grow across heights min_height..max_height (five heights for 2..6).
std::vector<Tree> ramped_half_and_half(std::size_t count, std::size_t min_height, std::size_t max_height,
                                       const PrimitiveFactory& factory, Rng& rng);

// Replaces a uniformly chosen subtree of `a` with a uniformly chosen subtree
// of `b`. Offspring over the limits fall back to a copy of `a`.
Tree crossover(const Tree& a, const Tree& b, Rng& rng, const TreeLimits& limits);

// Replaces a uniformly chosen subtree with a grow tree of height 1..max_new_height.
Tree subtree_mutate(const Tree& a, const PrimitiveFactory& factory, Rng& rng, const TreeLimits& limits,
                    std::size_t max_new_height = 4);

}  // namespace geoagg::gp
