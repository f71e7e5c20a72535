#include "hubforge/spec_text.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

#include "hubforge/error.hpp"

namespace hubforge {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

// Split on `sep` at parenthesis depth zero.
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

double parse_number(const std::string& field, const std::string& text) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw Error(ErrorCode::Config, "field '" + field + "': not a decimal literal: '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split_top(text, ';')) out.push_back(parse_number(field, part));
  return out;
}

// Removes one pair of enclosing parentheses, only when they match each other.
std::string strip_parens(const std::string& s) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') return s;
  int depth = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth == 0) return s;
  }
  return s.substr(1, s.size() - 2);
}

Envelope parse_envelope(const std::string& field, const std::string& text) {
  auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')')
    throw Error(ErrorCode::Config, "field '" + field + "': expected power(C;P) or linear(A;B)");
  std::string shape = trim(text.substr(0, open));
  auto args = parse_list(field, text.substr(open + 1, text.size() - open - 2));
  if (args.size() != 2) throw Error(ErrorCode::Config, "field '" + field + "': envelope takes two numbers");
  if (shape == "power") return Envelope::power(args[0], args[1]);
  if (shape == "linear") return Envelope::linear(args[0], args[1]);
  throw Error(ErrorCode::Config, "field '" + field + "': unknown envelope shape '" + shape + "'");
}

class Params {
 public:
  Params(std::string kind, const std::string& body) : kind_(std::move(kind)) {
    if (trim(body).empty()) return;
    for (const auto& item : split_top(body, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorCode::Config, kind_ + ": expected key=value, got '" + item + "'");
      std::string key = trim(item.substr(0, eq));
      if (values_.count(key)) throw Error(ErrorCode::Config, kind_ + ": duplicate field '" + key + "'");
      values_[key] = trim(item.substr(eq + 1));
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw Error(ErrorCode::Config, kind_ + ": missing field '" + key + "'");
    return *v;
  }

  double number(const std::string& key) { return parse_number(key, require(key)); }

  void finish() const {
    if (!values_.empty())
      throw Error(ErrorCode::Config, kind_ + ": unknown field '" + values_.begin()->first + "'");
  }

 private:
  std::string kind_;
  std::map<std::string, std::string> values_;
};

constexpr const char* kParityFormula = "(k==1 || k%2==0) ? (k+1)^2 : k^2-1";

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

AttachmentSpec parse_spec(std::string_view text_in) {
  const std::string text = trim(text_in);
  if (text == "parity-example") {
    auto spec = AttachmentSpec::piecewise(Expression::parse(kParityFormula));
    spec.declare_lower_envelope(Envelope::power(0.5, 2.0));
    spec.declare_kappa(2.0);
    return spec;
  }
  auto colon = text.find(':');
  std::string kind = trim(text.substr(0, colon));
  Params params(kind, colon == std::string::npos ? std::string() : text.substr(colon + 1));

  std::optional<AttachmentSpec> spec;
  if (kind == "constant") {
    spec = AttachmentSpec::constant(params.number("c"));
  } else if (kind == "linear") {
    double a = params.number("a");
    spec = AttachmentSpec::linear(a, params.number("b"));
  } else if (kind == "power") {
    double p = params.number("p");
    auto c = params.take("c");
    spec = AttachmentSpec::power(p, c ? parse_number("c", *c) : 1.0);
  } else if (kind == "table") {
    auto values = parse_list("values", params.require("values"));
    TailRule tail = TailRule::Error;
    if (auto t = params.take("tail")) {
      if (*t == "repeat-last") tail = TailRule::RepeatLast;
      else if (*t == "linear-extrapolate") tail = TailRule::LinearExtrapolate;
      else if (*t == "error") tail = TailRule::Error;
      else throw Error(ErrorCode::Config, "table: unknown tail rule '" + *t + "'");
    }
    spec = AttachmentSpec::table(std::move(values), tail);
  } else if (kind == "expr") {
    spec = AttachmentSpec::piecewise(Expression::parse(strip_parens(params.require("f"))));
  } else if (kind == "random") {
    auto values = parse_list("values", params.require("values"));
    auto probs = parse_list("probs", params.require("probs"));
    std::optional<AttachmentSpec> base;
    if (auto b = params.take("base")) base = parse_spec(strip_parens(*b));
    spec = AttachmentSpec::random_finite(std::move(values), std::move(probs), base);
  } else {
    throw Error(ErrorCode::Config, "unknown attachment kind '" + kind + "'");
  }

  if (auto v = params.take("lower")) spec->declare_lower_envelope(parse_envelope("lower", *v));
  if (auto v = params.take("upper")) spec->declare_upper_envelope(parse_envelope("upper", *v));
  if (auto v = params.take("kappa")) spec->declare_kappa(parse_number("kappa", *v));
  params.finish();
  return *spec;
}

namespace {

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + exact(v[i]);
  return out;
}

std::string envelope_text(const Envelope& e) {
  return std::string(e.shape == Envelope::Shape::Power ? "power(" : "linear(") + exact(e.x) + ";" +
         exact(e.y) + ")";
}

}  // namespace

std::string format_spec(const AttachmentSpec& spec) {
  std::ostringstream os;
  const auto& kind = spec.kind();
  if (auto* c = std::get_if<AttachmentSpec::Constant>(&kind)) {
    os << "constant:c=" << exact(c->c);
  } else if (auto* l = std::get_if<AttachmentSpec::Linear>(&kind)) {
    os << "linear:a=" << exact(l->a) << ",b=" << exact(l->b);
  } else if (auto* p = std::get_if<AttachmentSpec::Power>(&kind)) {
    os << "power:p=" << exact(p->p) << ",c=" << exact(p->c);
  } else if (auto* t = std::get_if<AttachmentSpec::Table>(&kind)) {
    os << "table:values=" << join(t->values) << ",tail="
       << (t->tail == TailRule::RepeatLast          ? "repeat-last"
           : t->tail == TailRule::LinearExtrapolate ? "linear-extrapolate"
                                                    : "error");
  } else if (auto* e = std::get_if<AttachmentSpec::Piecewise>(&kind)) {
    os << "expr:f=(" << e->formula.source() << ")";
  } else if (auto* r = std::get_if<AttachmentSpec::RandomFinite>(&kind)) {
    os << "random:values=" << join(r->values) << ",probs=" << join(r->probs) << ",base=("
       << format_spec(*r->base) << ")";
  }
  if (spec.has_declared_lower()) os << ",lower=" << envelope_text(*spec.lower_envelope_law());
  if (spec.has_declared_upper()) os << ",upper=" << envelope_text(*spec.upper_envelope_law());
  if (auto k = spec.declared_kappa()) os << ",kappa=" << exact(*k);
  return os.str();
}

}  // namespace hubforge
