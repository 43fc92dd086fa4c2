#include "geoagg/gp/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoagg/errors.hpp"

namespace geoagg::gp {

const char* op_symbol(Op op) noexcept {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Log: return "log";
    case Op::Exp: return "exp";
    case Op::Feature: return "x";
    case Op::Constant: return "const";
    case Op::Aggregate: return "agg";
  }
  return "?";
}

std::size_t subtree_end(const Tree& tree, std::size_t pos) {
  std::size_t need = 1;
  while (need > 0) {
    if (pos >= tree.size()) throw std::logic_error("subtree_end: malformed tree");
    need += static_cast<std::size_t>(arity(tree[pos].op));
    --need;
    ++pos;
  }
  return pos;
}

std::vector<std::size_t> node_depths(const Tree& tree) {
  std::vector<std::size_t> depths(tree.size(), 0);
  // Stack of (depth, remaining children) for open function nodes.
  std::vector<std::pair<std::size_t, int>> open;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const std::size_t d = open.empty() ? 0 : open.back().first + 1;
    depths[i] = d;
    if (!open.empty() && --open.back().second == 0) open.pop_back();
    const int a = arity(tree[i].op);
    if (a > 0) open.emplace_back(d, a);
  }
  return depths;
}

std::size_t tree_height(const Tree& tree) {
  std::size_t h = 0;
  for (std::size_t d : node_depths(tree)) h = std::max(h, d);
  return h;
}

bool well_formed(const Tree& tree) {
  if (tree.empty()) return false;
  std::size_t need = 1;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (need == 0) return false;
    need = need - 1 + static_cast<std::size_t>(arity(tree[i].op));
    if (tree[i].op == Op::Aggregate && !tree[i].agg) return false;
  }
  return need == 0;
}

bool within_limits(const Tree& tree, const TreeLimits& limits) {
  return tree.size() <= limits.max_size && tree_height(tree) <= limits.max_height;
}

bool has_aggregates(const Tree& tree) {
  return std::any_of(tree.begin(), tree.end(), [](const Node& n) { return n.op == Op::Aggregate; });
}

double protected_div(double a, double b) noexcept { return std::abs(b) < 1e-12 ? 1.0 : a / b; }
double protected_log(double a) noexcept { return std::abs(a) < 1e-12 ? 0.0 : std::log(std::abs(a)); }
double protected_exp(double a) noexcept { return std::exp(std::min(a, 32.0)); }

namespace {

struct Workspace {
  std::vector<std::vector<double>> stack;
};

thread_local Workspace t_ws;

inline double finite_or_zero(double v) noexcept { return std::isfinite(v) ? v : 0.0; }

}  // namespace

void eval_tree(const Tree& tree, const EvalContext& ctx, std::span<const DayIndex> rows, std::span<double> out) {
  const std::size_t n = rows.size();
  if (out.size() != n) throw InvalidInput("eval_tree: output length mismatch");
  auto& stack = t_ws.stack;
  std::size_t sp = 0;
  auto push = [&]() -> std::vector<double>& {
    if (sp == stack.size()) stack.emplace_back();
    auto& buf = stack[sp++];
    buf.resize(n);
    return buf;
  };

  for (std::size_t i = tree.size(); i-- > 0;) {
    const Node& node = tree[i];
    switch (node.op) {
      case Op::Feature: {
        if (!ctx.features || node.feature >= ctx.features->n_features)
          throw std::logic_error("eval_tree: unresolvable feature terminal x" + std::to_string(node.feature));
        const auto src = ctx.features->row(node.feature);
        auto& buf = push();
        for (std::size_t k = 0; k < n; ++k) buf[k] = src[rows[k]];
        break;
      }
      case Op::Aggregate: {
        if (!node.agg || node.agg->series.empty())
          throw std::logic_error("eval_tree: unbound aggregate terminal");
        const auto& src = node.agg->series;
        auto& buf = push();
        for (std::size_t k = 0; k < n; ++k) buf[k] = src[rows[k]];
        break;
      }
      case Op::Constant: {
        auto& buf = push();
        std::fill(buf.begin(), buf.end(), node.value);
        break;
      }
      case Op::Sin:
      case Op::Cos:
      case Op::Log:
      case Op::Exp: {
        if (sp < 1) throw std::logic_error("eval_tree: malformed tree");
        auto& a = stack[sp - 1];
        switch (node.op) {
          case Op::Sin: for (auto& v : a) v = finite_or_zero(std::sin(v)); break;
          case Op::Cos: for (auto& v : a) v = finite_or_zero(std::cos(v)); break;
          case Op::Log: for (auto& v : a) v = protected_log(v); break;
          default: for (auto& v : a) v = finite_or_zero(protected_exp(v)); break;
        }
        break;
      }
      default: {
        if (sp < 2) throw std::logic_error("eval_tree: malformed tree");
        const auto& a = stack[sp - 1];  // first argument
        auto& b = stack[sp - 2];        // second argument, receives the result
        switch (node.op) {
          case Op::Add: for (std::size_t k = 0; k < n; ++k) b[k] = finite_or_zero(a[k] + b[k]); break;
          case Op::Sub: for (std::size_t k = 0; k < n; ++k) b[k] = finite_or_zero(a[k] - b[k]); break;
          case Op::Mul: for (std::size_t k = 0; k < n; ++k) b[k] = finite_or_zero(a[k] * b[k]); break;
          default: for (std::size_t k = 0; k < n; ++k) b[k] = finite_or_zero(protected_div(a[k], b[k])); break;
        }
        --sp;
        break;
      }
    }
  }
  if (sp != 1) throw std::logic_error("eval_tree: malformed tree");
  std::copy(stack[0].begin(), stack[0].end(), out.begin());
}

std::vector<double> eval_tree(const Tree& tree, const EvalContext& ctx, std::span<const DayIndex> rows) {
  std::vector<double> out(rows.size());
  eval_tree(tree, ctx, rows, out);
  return out;
}

}  // namespace geoagg::gp
