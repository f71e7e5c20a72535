#include "hubforge/attachment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hubforge/error.hpp"

namespace hubforge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double checked(double v, Degree k) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "attachment weight at degree " << k << " is " << v;
    throw Error(ErrorCode::NonPositiveWeight, os.str());
  }
  return v;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::Config, std::string(what) + " must be finite");
}

}  // namespace

double Envelope::operator()(double k) const {
  if (shape == Shape::Linear) return x * k + y;
  return x * std::pow(k + 1.0, y);
}

Envelope Envelope::scaled(double factor) const {
  Envelope out = *this;
  if (shape == Shape::Linear) {
    out.x *= factor;
    out.y *= factor;
  } else {
    out.x *= factor;
  }
  return out;
}

bool Envelope::is_bounded() const {
  return shape == Shape::Linear ? x <= 0.0 : y <= 0.0;
}

AttachmentSpec AttachmentSpec::constant(double c) {
  require_finite(c, "constant c");
  if (c <= 0.0) throw Error(ErrorCode::NonPositiveWeight, "constant c must be > 0");
  return AttachmentSpec(Constant{c});
}

AttachmentSpec AttachmentSpec::linear(double a, double b) {
  require_finite(a, "linear a");
  require_finite(b, "linear b");
  if (b <= 0.0) throw Error(ErrorCode::NonPositiveWeight, "linear b = f(0) must be > 0");
  return AttachmentSpec(Linear{a, b});
}

AttachmentSpec AttachmentSpec::power(double p, double c) {
  require_finite(p, "power p");
  require_finite(c, "power c");
  if (c <= 0.0) throw Error(ErrorCode::NonPositiveWeight, "power c must be > 0");
  return AttachmentSpec(Power{p, c});
}

AttachmentSpec AttachmentSpec::table(std::vector<double> values, TailRule tail) {
  if (values.empty()) throw Error(ErrorCode::Config, "table needs at least one value");
  for (std::size_t i = 0; i < values.size(); ++i) checked(values[i], static_cast<Degree>(i));
  return AttachmentSpec(Table{std::move(values), tail});
}

AttachmentSpec AttachmentSpec::piecewise(Expression formula) {
  return AttachmentSpec(Piecewise{std::move(formula)});
}

AttachmentSpec AttachmentSpec::random_finite(std::vector<double> values, std::vector<double> probs,
                                             std::optional<AttachmentSpec> base) {
  if (values.empty() || values.size() != probs.size())
    throw Error(ErrorCode::Config, "random support needs matching non-empty values and probs");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw Error(ErrorCode::NonPositiveWeight, "random support values must be > 0");
    if (!(probs[i] > 0.0) || probs[i] > 1.0)
      throw Error(ErrorCode::Config, "random support probabilities must lie in (0, 1]");
    total += probs[i];
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::Config, "random support probabilities must sum to 1");
  AttachmentSpec b = base ? *base : constant(1.0);
  if (b.is_random()) throw Error(ErrorCode::UnsupportedSpec, "random base rule must be deterministic");
  return AttachmentSpec(
      RandomFinite{std::move(values), std::move(probs), std::make_shared<const AttachmentSpec>(b)});
}

AttachmentSpec& AttachmentSpec::declare_lower_envelope(Envelope env) {
  declared_lower_ = env;
  return *this;
}

AttachmentSpec& AttachmentSpec::declare_upper_envelope(Envelope env) {
  declared_upper_ = env;
  return *this;
}

AttachmentSpec& AttachmentSpec::declare_kappa(double kappa) {
  if (!(kappa >= 1.0)) throw Error(ErrorCode::Config, "declared kappa must be >= 1");
  declared_kappa_ = kappa;
  return *this;
}

std::string AttachmentSpec::name() const {
  return std::visit(overloaded{
                        [](const Constant&) { return std::string("constant"); },
                        [](const Linear&) { return std::string("linear"); },
                        [](const Power&) { return std::string("power"); },
                        [](const Table&) { return std::string("table"); },
                        [](const Piecewise&) { return std::string("expr"); },
                        [](const RandomFinite&) { return std::string("random"); },
                    },
                    kind_);
}

double AttachmentSpec::deterministic_value(Degree k) const {
  const double kd = static_cast<double>(k);
  return std::visit(
      overloaded{
          [](const Constant& c) { return c.c; },
          [&](const Linear& l) { return l.a * kd + l.b; },
          [&](const Power& p) { return p.c * std::pow(kd + 1.0, p.p); },
          [&](const Table& t) {
            const std::size_t n = t.values.size();
            if (k < n) return t.values[k];
            switch (t.tail) {
              case TailRule::RepeatLast:
                return t.values.back();
              case TailRule::LinearExtrapolate: {
                if (n < 2) return t.values.back();
                const double slope = t.values[n - 1] - t.values[n - 2];
                return t.values[n - 1] + slope * (kd - static_cast<double>(n - 1));
              }
              case TailRule::Error:
                break;
            }
            throw Error(ErrorCode::TableOutOfRange,
                        "degree " + std::to_string(k) + " beyond table of size " + std::to_string(n));
          },
          [&](const Piecewise& e) { return e.formula(kd); },
          [](const RandomFinite&) -> double {
            throw Error(ErrorCode::MissingRng, "random attachment rule needs a random source");
          },
      },
      kind_);
}

double AttachmentSpec::evaluate(Degree k) const { return checked(deterministic_value(k), k); }

double AttachmentSpec::evaluate(Degree k, RandomSource* rng) const {
  const auto* r = std::get_if<RandomFinite>(&kind_);
  if (!r) return evaluate(k);
  if (!rng) throw Error(ErrorCode::MissingRng, "random attachment rule needs a random source");
  const double base = r->base->evaluate(k);
  double u = rng->uniform();
  for (std::size_t i = 0; i + 1 < r->values.size(); ++i) {
    if (u < r->probs[i]) return base * r->values[i];
    u -= r->probs[i];
  }
  return base * r->values.back();
}

std::vector<std::pair<double, double>> AttachmentSpec::rate_support(Degree k) const {
  if (const auto* r = std::get_if<RandomFinite>(&kind_)) {
    const double base = r->base->evaluate(k);
    std::vector<std::pair<double, double>> out;
    out.reserve(r->values.size());
    for (std::size_t i = 0; i < r->values.size(); ++i) out.emplace_back(base * r->values[i], r->probs[i]);
    return out;
  }
  return {{evaluate(k), 1.0}};
}

double AttachmentSpec::laplace_factor(Degree k, double s) const {
  if (!(s > 0.0)) throw Error(ErrorCode::Precondition, "Laplace argument must be > 0");
  double acc = 0.0;
  for (auto [rate, prob] : rate_support(k)) acc += prob * (rate / (rate + s));
  return acc;
}

double AttachmentSpec::log_laplace_factor(Degree k, double s) const {
  if (!(s > 0.0)) throw Error(ErrorCode::Precondition, "Laplace argument must be > 0");
  if (!is_random()) return -std::log1p(s / evaluate(k));
  return std::log(laplace_factor(k, s));
}

double AttachmentSpec::log_symmetric_diff_moment(Degree k, double lambda) const {
  if (lambda < 0.0) throw Error(ErrorCode::Precondition, "lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  const auto support = rate_support(k);
  double up = 0.0;    // E[F/(F-lambda)] = E e^{lambda X'}
  double down = 0.0;  // E[F/(F+lambda)] = E e^{-lambda X}
  for (auto [rate, prob] : support) {
    if (!(lambda < rate)) {
      std::ostringstream os;
      os << "lambda " << lambda << " >= rate " << rate << " at degree " << k;
      throw Error(ErrorCode::DivergentMoment, os.str());
    }
  }
  if (support.size() == 1) {
    const double r = lambda / support.front().first;
    return -std::log1p(-r * r);
  }
  for (auto [rate, prob] : support) {
    up += prob * rate / (rate - lambda);
    down += prob * rate / (rate + lambda);
  }
  return std::log(up) + std::log(down);
}

double AttachmentSpec::symmetric_diff_moment(Degree k, double lambda) const {
  return std::exp(log_symmetric_diff_moment(k, lambda));
}

double AttachmentSpec::lower_envelope(Degree k) const {
  if (const auto* r = std::get_if<RandomFinite>(&kind_))
    return r->base->evaluate(k) * *std::min_element(r->values.begin(), r->values.end());
  return evaluate(k);
}

double AttachmentSpec::upper_bound(Degree k) const {
  if (const auto* r = std::get_if<RandomFinite>(&kind_))
    return r->base->evaluate(k) * *std::max_element(r->values.begin(), r->values.end());
  return evaluate(k);
}

namespace {

std::optional<Envelope> kind_envelope(const AttachmentSpec::Kind& kind) {
  return std::visit(
      overloaded{
          [](const AttachmentSpec::Constant& c) -> std::optional<Envelope> {
            return Envelope::linear(0.0, c.c);
          },
          [](const AttachmentSpec::Linear& l) -> std::optional<Envelope> {
            if (l.a < 0.0) return std::nullopt;
            return Envelope::linear(l.a, l.b);
          },
          [](const AttachmentSpec::Power& p) -> std::optional<Envelope> {
            return Envelope::power(p.c, p.p);
          },
          [](const AttachmentSpec::Table& t) -> std::optional<Envelope> {
            const std::size_t n = t.values.size();
            if (t.tail == TailRule::RepeatLast || (t.tail == TailRule::LinearExtrapolate && n < 2))
              return Envelope::linear(0.0, t.values.back(), n - 1);
            if (t.tail == TailRule::LinearExtrapolate) {
              const double slope = t.values[n - 1] - t.values[n - 2];
              if (slope < 0.0) return std::nullopt;
              const double intercept = t.values[n - 1] - slope * static_cast<double>(n - 1);
              return Envelope::linear(slope, intercept, n - 1);
            }
            return std::nullopt;
          },
          [](const AttachmentSpec::Piecewise&) -> std::optional<Envelope> { return std::nullopt; },
          [](const AttachmentSpec::RandomFinite&) -> std::optional<Envelope> { return std::nullopt; },
      },
      kind);
}

}  // namespace

std::optional<Envelope> AttachmentSpec::lower_envelope_law() const {
  if (declared_lower_) return declared_lower_;
  if (const auto* r = std::get_if<RandomFinite>(&kind_)) {
    auto base = r->base->lower_envelope_law();
    if (!base) return std::nullopt;
    return base->scaled(*std::min_element(r->values.begin(), r->values.end()));
  }
  return kind_envelope(kind_);
}

std::optional<Envelope> AttachmentSpec::upper_envelope_law() const {
  if (declared_upper_) return declared_upper_;
  if (const auto* r = std::get_if<RandomFinite>(&kind_)) {
    auto base = r->base->upper_envelope_law();
    if (!base) return std::nullopt;
    return base->scaled(*std::max_element(r->values.begin(), r->values.end()));
  }
  return kind_envelope(kind_);
}

std::optional<double> AttachmentSpec::infimum() const {
  return std::visit(
      overloaded{
          [](const Constant& c) -> std::optional<double> { return c.c; },
          [](const Linear& l) -> std::optional<double> {
            if (l.a < 0.0) return std::nullopt;
            return l.b;
          },
          [](const Power& p) -> std::optional<double> {
            if (p.p < 0.0) return std::nullopt;
            return p.c;
          },
          [](const Table& t) -> std::optional<double> {
            double lo = *std::min_element(t.values.begin(), t.values.end());
            if (t.tail == TailRule::RepeatLast) return lo;
            if (t.tail == TailRule::LinearExtrapolate) {
              const std::size_t n = t.values.size();
              if (n < 2 || t.values[n - 1] >= t.values[n - 2]) return lo;
            }
            return std::nullopt;
          },
          [this](const Piecewise&) -> std::optional<double> {
            if (!declared_lower_) return std::nullopt;
            const Envelope& e = *declared_lower_;
            if (e.valid_from != 0) return std::nullopt;
            if (e.shape == Envelope::Shape::Linear && e.x >= 0.0 && e.y > 0.0) return e.y;
            if (e.shape == Envelope::Shape::Power && e.y >= 0.0 && e.x > 0.0) return e.x;
            return std::nullopt;
          },
          [](const RandomFinite& r) -> std::optional<double> {
            auto base = r.base->infimum();
            if (!base) return std::nullopt;
            return *base * *std::min_element(r.values.begin(), r.values.end());
          },
      },
      kind_);
}

}  // namespace hubforge
