#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geoagg/aggregation.hpp"
#include "geoagg/raster.hpp"
#include "geoagg/spatial.hpp"

namespace geoagg::gp {

enum class Op : std::uint8_t { Add, Sub, Mul, Div, Sin, Cos, Log, Exp, Feature, Constant, Aggregate };

constexpr int arity(Op op) noexcept {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Sin:
    case Op::Cos:
    case Op::Log:
    case Op::Exp: return 1;
    default: return 0;
  }
}
constexpr bool is_terminal(Op op) noexcept { return arity(op) == 0; }
const char* op_symbol(Op op) noexcept;

// An embedded aggregation terminal: a circle feature plus its aggregated
// series over every day of the active fold. Immutable once built; nodes
// share it, and a circle mutation swaps in a fresh one.
struct AggTerminal {
  CircleFeature def;
  std::vector<double> series;
};

struct Node {
  Op op = Op::Constant;
  std::uint32_t feature = 0;  // Op::Feature
  double value = 0.0;         // Op::Constant
  std::shared_ptr<const AggTerminal> agg;  // Op::Aggregate

  static Node function(Op op) { return Node{op, 0, 0.0, nullptr}; }
  static Node feature_ref(std::uint32_t index) { return Node{Op::Feature, index, 0.0, nullptr}; }
  static Node constant(double v) { return Node{Op::Constant, 0, v, nullptr}; }
  static Node aggregate(std::shared_ptr<const AggTerminal> t) { return Node{Op::Aggregate, 0, 0.0, std::move(t)}; }
};

// Prefix-order (root first) expression tree.
using Tree = std::vector<Node>;

struct TreeLimits {
  std::size_t max_height = 17;
  std::size_t max_size = 300;
};

// One past the last node of the subtree rooted at `pos`.
std::size_t subtree_end(const Tree& tree, std::size_t pos);
// Depth of every node; the root has depth 0.
std::vector<std::size_t> node_depths(const Tree& tree);
// Maximum node depth (a lone terminal has height 0).
std::size_t tree_height(const Tree& tree);
bool well_formed(const Tree& tree);
bool within_limits(const Tree& tree, const TreeLimits& limits);
bool has_aggregates(const Tree& tree);

// Stable textual label of a node, used for structural audits and output.
std::string node_label(const Node& node);

// Protected primitives: results are always finite.
double protected_div(double a, double b) noexcept;
double protected_log(double a) noexcept;
double protected_exp(double a) noexcept;

// Feature-reference terminals read rows of `features`; aggregate terminals
// read their own series. Both are indexed by day.
struct EvalContext {
  const FeatureMatrix* features = nullptr;
};

// Evaluates the tree for each listed day. Any non-finite intermediate is
// replaced by 0, so outputs are always finite.
void eval_tree(const Tree& tree, const EvalContext& ctx, std::span<const DayIndex> rows, std::span<double> out);
std::vector<double> eval_tree(const Tree& tree, const EvalContext& ctx, std::span<const DayIndex> rows);

// S-expression form, e.g. `(+ x3 (* (agg 0 30.5 81.25 120) 0.5))`.
std::string to_sexpr(const Tree& tree);
// Aggregate terminals come back with empty series; call bind_aggregates.
Tree parse_sexpr(const std::string& text);
void bind_aggregates(Tree& tree, const AggregationEngine& engine);

}  // namespace geoagg::gp
