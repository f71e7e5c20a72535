#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hubforge/expression.hpp"
#include "hubforge/rng.hpp"

namespace hubforge {

using Degree = std::uint32_t;

enum class TailRule { RepeatLast, LinearExtrapolate, Error };

/// A closed-form comparison function for an attachment rule:
///   Linear: x*k + y        Power: x*(k+1)^y
/// `valid_from` is the first degree at which the comparison holds.
struct Envelope {
  enum class Shape { Linear, Power };

  Shape shape = Shape::Linear;
  double x = 0.0;
  double y = 1.0;
  std::size_t valid_from = 0;

  static Envelope linear(double slope, double intercept, std::size_t from = 0) {
    return {Shape::Linear, slope, intercept, from};
  }
  static Envelope power(double scale, double exponent, std::size_t from = 0) {
    return {Shape::Power, scale, exponent, from};
  }

  double operator()(double k) const;
  Envelope scaled(double factor) const;
  bool is_bounded() const;  // constant or decreasing
};

/// Attachment rule: degree k -> positive weight f(k), or an i.i.d. random
/// weight F(k) with finite support.
///
/// RandomFinite draws F(k) = base(k) * V with V taking `values[i]` with
/// probability `probs[i]`, independently per (node, degree). The base rule
/// defaults to Constant(1).
class AttachmentSpec {
 public:
  struct Constant { double c; };
  struct Linear { double a, b; };  // f(k) = a*k + b
  struct Power { double p, c; };   // f(k) = c*(k+1)^p
  struct Table {
    std::vector<double> values;
    TailRule tail = TailRule::Error;
  };
  struct Piecewise { Expression formula; };
  struct RandomFinite {
    std::vector<double> values;
    std::vector<double> probs;
    std::shared_ptr<const AttachmentSpec> base;
  };
  using Kind = std::variant<Constant, Linear, Power, Table, Piecewise, RandomFinite>;

  static AttachmentSpec constant(double c);
  static AttachmentSpec linear(double a, double b);
  static AttachmentSpec power(double p, double c);
  static AttachmentSpec table(std::vector<double> values, TailRule tail = TailRule::Error);
  static AttachmentSpec piecewise(Expression formula);
  static AttachmentSpec random_finite(std::vector<double> values, std::vector<double> probs,
                                      std::optional<AttachmentSpec> base = std::nullopt);

  /// User declarations for rules whose asymptotics cannot be derived
  /// (piecewise formulas). Criteria verify them over their horizon.
  AttachmentSpec& declare_lower_envelope(Envelope env);
  AttachmentSpec& declare_upper_envelope(Envelope env);
  AttachmentSpec& declare_kappa(double kappa);

  const Kind& kind() const { return kind_; }
  bool is_random() const { return std::holds_alternative<RandomFinite>(kind_); }
  std::string name() const;

  /// f(k) for deterministic rules. MissingRng for RandomFinite.
  double evaluate(Degree k) const;
  /// f(k), or a fresh draw of F(k) when the rule is random.
  double evaluate(Degree k, RandomSource* rng) const;
  double evaluate(Degree k, RandomSource& rng) const { return evaluate(k, &rng); }

  /// Realized rates of F(k) with their probabilities; a single atom when deterministic.
  std::vector<std::pair<double, double>> rate_support(Degree k) const;

  /// E[F(k) / (F(k) + s)], the Laplace transform at s of an Exp(F(k)) mixture.
  double laplace_factor(Degree k, double s) const;
  double log_laplace_factor(Degree k, double s) const;

  /// E[exp(lambda (X' - X))] for independent Exp(F(k)) mixtures X, X'.
  double symmetric_diff_moment(Degree k, double lambda) const;
  double log_symmetric_diff_moment(Degree k, double lambda) const;

  /// x_k with F(k) >= x_k almost surely.
  double lower_envelope(Degree k) const;
  /// u_k with F(k) <= u_k almost surely.
  double upper_bound(Degree k) const;

  /// Analytic envelopes of the whole sequence, when known from the kind or declared.
  std::optional<Envelope> lower_envelope_law() const;
  std::optional<Envelope> upper_envelope_law() const;
  /// Positive lower bound on every value of F, when known.
  std::optional<double> infimum() const;
  std::optional<double> declared_kappa() const { return declared_kappa_; }
  bool has_declared_lower() const { return declared_lower_.has_value(); }
  bool has_declared_upper() const { return declared_upper_.has_value(); }

 private:
  explicit AttachmentSpec(Kind kind) : kind_(std::move(kind)) {}

  double deterministic_value(Degree k) const;

  Kind kind_;
  std::optional<Envelope> declared_lower_;
  std::optional<Envelope> declared_upper_;
  std::optional<double> declared_kappa_;
};

}  // namespace hubforge
