#include <array>
#include <charconv>
#include <cctype>
#include <string>

#include "geoagg/errors.hpp"
#include "geoagg/gp/tree.hpp"

namespace geoagg::gp {
namespace {

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string agg_text(const AggTerminal& t) {
  return "(agg " + std::to_string(t.def.var) + ' ' + fmt(t.def.circle.lat) + ' ' + fmt(t.def.circle.lon) + ' ' +
         fmt(t.def.circle.radius_km) + ')';
}

void write(const Tree& tree, std::size_t& pos, std::string& out) {
  const Node& n = tree.at(pos++);
  switch (n.op) {
    case Op::Feature: out += 'x' + std::to_string(n.feature); return;
    case Op::Constant: out += fmt(n.value); return;
    case Op::Aggregate: out += agg_text(*n.agg); return;
    default: break;
  }
  out += '(';
  out += op_symbol(n.op);
  for (int k = 0; k < arity(n.op); ++k) {
    out += ' ';
    write(tree, pos, out);
  }
  out += ')';
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Tree parse() {
    Tree tree;
    node(tree);
    skip_ws();
    if (i_ != s_.size()) fail("trailing characters");
    return tree;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("s-expression: " + why + " at offset " + std::to_string(i_));
  }
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  std::string token() {
    skip_ws();
    const std::size_t start = i_;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')') ++i_;
    if (start == i_) fail("expected token");
    return s_.substr(start, i_ - start);
  }
  template <typename T>
  T number(const std::string& tok) const {
    T v{};
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) fail("bad number `" + tok + "`");
    return v;
  }

  void node(Tree& tree) {
    skip_ws();
    if (i_ >= s_.size()) fail("unexpected end");
    if (s_[i_] != '(') {
      const std::string tok = token();
      if (tok.size() > 1 && tok[0] == 'x') {
        tree.push_back(Node::feature_ref(number<std::uint32_t>(tok.substr(1))));
      } else {
        tree.push_back(Node::constant(number<double>(tok)));
      }
      return;
    }
    ++i_;
    const std::string head = token();
    if (head == "agg") {
      auto t = std::make_shared<AggTerminal>();
      t->def.var = number<std::size_t>(token());
      t->def.circle.lat = number<double>(token());
      t->def.circle.lon = number<double>(token());
      t->def.circle.radius_km = number<double>(token());
      tree.push_back(Node::aggregate(std::move(t)));
    } else {
      Op op{};
      bool found = false;
      for (Op cand : {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sin, Op::Cos, Op::Log, Op::Exp})
        if (head == op_symbol(cand)) {
          op = cand;
          found = true;
        }
      if (!found) fail("unknown operator `" + head + "`");
      tree.push_back(Node::function(op));
      for (int k = 0; k < arity(op); ++k) node(tree);
    }
    skip_ws();
    if (i_ >= s_.size() || s_[i_] != ')') fail("expected `)`");
    ++i_;
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

std::string node_label(const Node& node) {
  switch (node.op) {
    case Op::Feature: return 'x' + std::to_string(node.feature);
    case Op::Constant: return fmt(node.value);
    case Op::Aggregate: return node.agg ? agg_text(*node.agg) : "(agg ?)";
    default: return op_symbol(node.op);
  }
}

std::string to_sexpr(const Tree& tree) {
  std::string out;
  std::size_t pos = 0;
  write(tree, pos, out);
  return out;
}

Tree parse_sexpr(const std::string& text) { return Parser(text).parse(); }

void bind_aggregates(Tree& tree, const AggregationEngine& engine) {
  for (Node& n : tree) {
    if (n.op != Op::Aggregate) continue;
    auto t = std::make_shared<AggTerminal>(*n.agg);
    t->series = engine.series(t->def);
    n.agg = std::move(t);
  }
}

}  // namespace geoagg::gp
