#include "hubforge/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "hubforge/error.hpp"

namespace hubforge {
namespace detail {

enum class Op {
  Number, Var, Neg, Not, Add, Sub, Mul, Div, Mod, Pow,
  Eq, Ne, Lt, Le, Gt, Ge, And, Or, Select, Call,
};

enum class Fn { Log, Exp, Sqrt, Abs, Floor, Ceil, Min, Max, Pow };

struct ExprNode {
  Op op = Op::Number;
  double value = 0.0;
  Fn fn = Fn::Log;
  std::vector<std::shared_ptr<const ExprNode>> args;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::Config,
                "expression '" + std::string(src_) + "' column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip();
    if (src_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  NodePtr expr() {
    NodePtr cond = logical_or();
    if (accept("?")) {
      NodePtr yes = expr();
      expect(":");
      NodePtr no = expr();
      return make(Op::Select, {cond, yes, no});
    }
    return cond;
  }

  NodePtr logical_or() {
    NodePtr lhs = logical_and();
    while (accept("||")) lhs = make(Op::Or, {lhs, logical_and()});
    return lhs;
  }

  NodePtr logical_and() {
    NodePtr lhs = comparison();
    while (accept("&&")) lhs = make(Op::And, {lhs, comparison()});
    return lhs;
  }

  NodePtr comparison() {
    NodePtr lhs = sum();
    // Two-character operators first.
    if (accept("==")) return make(Op::Eq, {lhs, sum()});
    if (accept("!=")) return make(Op::Ne, {lhs, sum()});
    if (accept("<=")) return make(Op::Le, {lhs, sum()});
    if (accept(">=")) return make(Op::Ge, {lhs, sum()});
    if (accept("<")) return make(Op::Lt, {lhs, sum()});
    if (accept(">")) return make(Op::Gt, {lhs, sum()});
    return lhs;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept("+")) {
        lhs = make(Op::Add, {lhs, product()});
      } else if (accept("-")) {
        lhs = make(Op::Sub, {lhs, product()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept("*")) {
        lhs = make(Op::Mul, {lhs, unary()});
      } else if (accept("/")) {
        lhs = make(Op::Div, {lhs, unary()});
      } else if (accept("%")) {
        lhs = make(Op::Mod, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept("-")) return make(Op::Neg, {unary()});
    skip();
    if (pos_ < src_.size() && src_[pos_] == '!' && src_.substr(pos_, 2) != "!=") {
      ++pos_;
      return make(Op::Not, {unary()});
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept("^")) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      expect(")");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::string tail(src_.substr(pos_));
      char* end = nullptr;
      double v = std::strtod(tail.c_str(), &end);
      if (end == tail.c_str()) fail("bad number");
      pos_ += static_cast<std::size_t>(end - tail.c_str());
      return number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      if (name == "k") return make(Op::Var, {});
      if (name == "pi") return number(M_PI);
      if (name == "e") return number(M_E);
      return call(name);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr call(const std::string& name) {
    static const struct {
      const char* name;
      Fn fn;
      std::size_t arity;
    } table[] = {
        {"log", Fn::Log, 1},   {"exp", Fn::Exp, 1}, {"sqrt", Fn::Sqrt, 1},
        {"abs", Fn::Abs, 1},   {"floor", Fn::Floor, 1}, {"ceil", Fn::Ceil, 1},
        {"min", Fn::Min, 2},   {"max", Fn::Max, 2}, {"pow", Fn::Pow, 2},
    };
    for (const auto& entry : table) {
      if (name != entry.name) continue;
      expect("(");
      std::vector<NodePtr> args{expr()};
      while (accept(",")) args.push_back(expr());
      expect(")");
      if (args.size() != entry.arity) fail("wrong number of arguments to " + name);
      auto n = std::make_shared<ExprNode>();
      n->op = Op::Call;
      n->fn = entry.fn;
      n->args = std::move(args);
      return n;
    }
    fail("unknown identifier '" + name + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double eval(const ExprNode& n, double k) {
  auto a = [&](std::size_t i) { return eval(*n.args[i], k); };
  switch (n.op) {
    case Op::Number: return n.value;
    case Op::Var: return k;
    case Op::Neg: return -a(0);
    case Op::Not: return a(0) == 0.0 ? 1.0 : 0.0;
    case Op::Add: return a(0) + a(1);
    case Op::Sub: return a(0) - a(1);
    case Op::Mul: return a(0) * a(1);
    case Op::Div: return a(0) / a(1);
    case Op::Mod: return std::fmod(a(0), a(1));
    case Op::Pow: return std::pow(a(0), a(1));
    case Op::Eq: return a(0) == a(1) ? 1.0 : 0.0;
    case Op::Ne: return a(0) != a(1) ? 1.0 : 0.0;
    case Op::Lt: return a(0) < a(1) ? 1.0 : 0.0;
    case Op::Le: return a(0) <= a(1) ? 1.0 : 0.0;
    case Op::Gt: return a(0) > a(1) ? 1.0 : 0.0;
    case Op::Ge: return a(0) >= a(1) ? 1.0 : 0.0;
    case Op::And: return (a(0) != 0.0 && a(1) != 0.0) ? 1.0 : 0.0;
    case Op::Or: return (a(0) != 0.0 || a(1) != 0.0) ? 1.0 : 0.0;
    case Op::Select: return a(0) != 0.0 ? a(1) : a(2);
    case Op::Call:
      switch (n.fn) {
        case Fn::Log: return std::log(a(0));
        case Fn::Exp: return std::exp(a(0));
        case Fn::Sqrt: return std::sqrt(a(0));
        case Fn::Abs: return std::fabs(a(0));
        case Fn::Floor: return std::floor(a(0));
        case Fn::Ceil: return std::ceil(a(0));
        case Fn::Min: return std::fmin(a(0), a(1));
        case Fn::Max: return std::fmax(a(0), a(1));
        case Fn::Pow: return std::pow(a(0), a(1));
      }
  }
  return std::nan("");
}

}  // namespace
}  // namespace detail

Expression Expression::parse(std::string_view source) {
  detail::Parser parser(source);
  auto root = parser.parse();
  return Expression(std::string(source), std::move(root));
}

double Expression::operator()(double k) const { return detail::eval(*root_, k); }

}  // namespace hubforge
