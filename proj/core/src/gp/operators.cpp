#include "geoagg/gp/operators.hpp"

#include <array>

#include "geoagg/errors.hpp"

namespace geoagg::gp {
namespace {

constexpr std::array<Op, 8> kFunctions{Op::Sin, Op::Cos, Op::Log, Op::Exp, Op::Mul, Op::Add, Op::Sub, Op::Div};

}  // namespace

PrimitiveFactory PrimitiveFactory::features(std::size_t n_features) {
  if (n_features == 0) throw InvalidInput("PrimitiveFactory: empty feature set");
  PrimitiveFactory f;
  f.n_features_ = n_features;
  return f;
}

PrimitiveFactory PrimitiveFactory::aggregates(const AggregationEngine& engine) {
  PrimitiveFactory f;
  f.engine_ = &engine;
  return f;
}

std::shared_ptr<const AggTerminal> PrimitiveFactory::make_aggregate(const CircleFeature& def) const {
  auto t = std::make_shared<AggTerminal>();
  t->def = def;
  t->series = engine_->series(def);
  return t;
}

Node PrimitiveFactory::terminal(Rng& rng) const {
  const std::size_t slots = aggregate_mode() ? engine_->raster().n_vars() : n_features_;
  std::uniform_int_distribution<std::size_t> pick(0, slots);
  const std::size_t k = pick(rng);
  if (k == slots) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    return Node::constant(c(rng));
  }
  if (!aggregate_mode()) return Node::feature_ref(static_cast<std::uint32_t>(k));
  CircleFeature def;
  def.circle = random_circle(rng, engine_->grid());
  def.var = k;
  return Node::aggregate(make_aggregate(def));
}

Node PrimitiveFactory::function(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, kFunctions.size() - 1);
  return Node::function(kFunctions[pick(rng)]);
}

void PrimitiveFactory::build(Tree& out, std::size_t depth, std::size_t height, bool full, Rng& rng) const {
  bool leaf = depth >= height;
  if (!leaf && !full && depth > 0) leaf = std::bernoulli_distribution(0.5)(rng);
  if (leaf) {
    out.push_back(terminal(rng));
    return;
  }
  const Node fn = function(rng);
  out.push_back(fn);
  for (int k = 0; k < arity(fn.op); ++k) build(out, depth + 1, height, full, rng);
}

Tree PrimitiveFactory::full(std::size_t height, Rng& rng) const {
  Tree t;
  build(t, 0, height, true, rng);
  return t;
}

Tree PrimitiveFactory::grow(std::size_t height, Rng& rng) const {
  Tree t;
  build(t, 0, height, false, rng);
  return t;
}

std::vector<Tree> ramped_half_and_half(std::size_t count, std::size_t min_height, std::size_t max_height,
                                       const PrimitiveFactory& factory, Rng& rng) {
  if (min_height > max_height) throw InvalidInput("ramped_half_and_half: min_height > max_height");
  const std::size_t buckets = 2 * (max_height - min_height + 1);
  std::vector<Tree> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t b = i % buckets;
    const std::size_t h = min_height + b / 2;
    out.push_back(b % 2 == 0 ? factory.full(h, rng) : factory.grow(h, rng));
  }
  return out;
}

Tree crossover(const Tree& a, const Tree& b, Rng& rng, const TreeLimits& limits) {
  std::uniform_int_distribution<std::size_t> pa(0, a.size() - 1);
  std::uniform_int_distribution<std::size_t> pb(0, b.size() - 1);
  const std::size_t i = pa(rng);
  const std::size_t j = pb(rng);
  const std::size_t i_end = subtree_end(a, i);
  const std::size_t j_end = subtree_end(b, j);

  Tree child;
  child.reserve(i + (j_end - j) + (a.size() - i_end));
  child.insert(child.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i));
  child.insert(child.end(), b.begin() + static_cast<std::ptrdiff_t>(j), b.begin() + static_cast<std::ptrdiff_t>(j_end));
  child.insert(child.end(), a.begin() + static_cast<std::ptrdiff_t>(i_end), a.end());
  if (!within_limits(child, limits)) return a;
  return child;
}

Tree subtree_mutate(const Tree& a, const PrimitiveFactory& factory, Rng& rng, const TreeLimits& limits,
                    std::size_t max_new_height) {
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  std::uniform_int_distribution<std::size_t> height(1, std::max<std::size_t>(1, max_new_height));
  const std::size_t i = pick(rng);
  const std::size_t i_end = subtree_end(a, i);
  const Tree fresh = factory.grow(height(rng), rng);

  Tree child;
  child.reserve(a.size() - (i_end - i) + fresh.size());
  child.insert(child.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i));
  child.insert(child.end(), fresh.begin(), fresh.end());
  child.insert(child.end(), a.begin() + static_cast<std::ptrdiff_t>(i_end), a.end());
  if (!within_limits(child, limits)) return a;
  return child;
}

}  // namespace geoagg::gp
