#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hubforge/attachment.hpp"

namespace hubforge::criteria {

enum class SeriesVerdict { Converges, Diverges, Unknown };
const char* to_string(SeriesVerdict v);

/// Partial sum of an infinite positive series together with analytic bounds
/// on the part beyond the truncation point.
///
/// `certified` is set only when the verdict rests on an analytic argument
/// (integral test on a known envelope, geometric or Gamma-ratio tail, or a
/// divergent minorant). A finite partial sum alone never certifies.
struct SeriesBound {
  double partial = 0.0;
  double tail_lower = 0.0;
  double tail_upper = std::numeric_limits<double>::infinity();
  std::size_t truncation = 0;  // last index included in `partial`
  SeriesVerdict verdict = SeriesVerdict::Unknown;
  bool certified = false;
  double rounding = 0.0;  // floating-point allowance on `partial`
  std::string method = "truncation-only";

  double lower() const { return partial + tail_lower - rounding; }
  double upper() const { return partial + tail_upper + rounding; }
  double estimate() const;
};

inline constexpr std::size_t kDefaultTruncation = 1'000'000;

/// sum_{j>=0} 1/x_j^2 over the lower envelope x_j (x_j = f(j) for deterministic
/// rules). Convergence is certified through the lower envelope law; divergence
/// through the upper envelope law (an almost-sure statement for random rules).
SeriesBound inverse_square_sum(const AttachmentSpec& spec, std::size_t truncation = kDefaultTruncation);

/// sum_{i>=0} prod_{j<=i} E[F(j)/(F(j)+lambda)], accumulated in log space.
SeriesBound malthus_sum(const AttachmentSpec& spec, double lambda,
                        std::size_t truncation = kDefaultTruncation);

enum class LambdaTarget { LessThanOne, Finite };

struct LambdaWitness {
  double lambda;
  SeriesBound sum;
};

struct LambdaSearch {
  double lo = 1e-6;
  double hi = 1e6;
  int iterations = 60;
  std::size_t truncation = 100'000;
};

/// Smallest grid point lambda (log-scale bisection; the sum is decreasing in
/// lambda) whose certified sum meets the target. nullopt when the range is exhausted.
std::optional<LambdaWitness> find_lambda(const AttachmentSpec& spec, LambdaTarget target,
                                         const LambdaSearch& search = {});

struct AlphaK {
  double alpha;
  std::uint64_t K;
  double eta_K;                 // sqrt(1 / (2 sum_{i>=K} 1/x_i^2)), >= alpha
  double log_product_upper;     // certified log of prod_{deg>=K} E e^{alpha (X'-X)}
  double product_bound = 7.38905609893065;  // e^2
  SeriesBound laplace_sum;      // first condition, < 1
};

/// Witness pair for the persistence condition: alpha from find_lambda(<1), K the
/// first index whose eta_K reaches alpha. nullopt when sum 1/x^2 is not
/// certified finite or no alpha exists.
std::optional<AlphaK> alpha_K_search(const AttachmentSpec& spec, const LambdaSearch& search = {},
                                     std::size_t truncation = kDefaultTruncation);

struct KappaReport {
  double kappa_horizon = 0.0;       // sup over n <= horizon
  std::uint64_t argmax = 0;
  std::uint64_t horizon = 0;
  bool nondecreasing_on_horizon = false;
  bool certified_global = false;
  std::optional<double> kappa_global;  // valid for every n when certified_global
  std::string basis;
};

/// Smallest kappa with max_{i<=n} f(i)/(i+1) <= kappa f(n)/(n+1) for all n <= horizon.
KappaReport kappa_of(const AttachmentSpec& spec, std::uint64_t horizon);

struct ThreeSeries {
  double cutoff = 1.0;
  SeriesBound tail_probability;    // sum P(|S_j| > C)
  SeriesBound truncated_mean;      // sum E[S_j 1{|S_j|<=C}], zero by symmetry
  SeriesBound truncated_variance;  // sum Var(S_j 1{|S_j|<=C})
  SeriesVerdict verdict = SeriesVerdict::Unknown;
  bool certified = false;
};

/// The three series for S_j = X_j - X'_j, X_j ~ Exp(F(j-1)) mixtures, with
/// per-term closed forms from the (asymmetric) Laplace density.
ThreeSeries three_series_check(const AttachmentSpec& spec, double cutoff,
                               std::size_t truncation = 100'000);

struct GammaRatioRow {
  std::uint64_t i;
  double term;          // prod_{j<=i} C0(j+1)/(C0(j+1)+lambda)
  double ratio;         // Gamma(i+2)/Gamma(i+2+s), s = lambda/C0
  double scaled_ratio;  // ratio * (i+1)^s
};

struct GammaRatioReport {
  double exponent = 0.0;  // s = lambda / C0
  std::vector<GammaRatioRow> rows;
  double c1 = 1.0;        // smallest C1 with ratio <= C1 (i+1)^{-s} for all i
  double partial = 0.0;
  double exact_tail = 0.0;
  double exact_total = std::numeric_limits<double>::infinity();  // C0/(lambda-C0) when s > 1
  double summed_bound = std::numeric_limits<double>::infinity(); // C1 Gamma(1+s) zeta(s)
  bool bound_finite = false;
};

GammaRatioReport gamma_ratio_bound(double c0, double lambda, std::uint64_t truncation,
                                   bool keep_rows = true);

enum class Verdict { NoPersistentHub, UniquePersistentHub, PersistentHub, Inconclusive };
enum class Route { None, InverseSquareDivergence, MalthusianSum, ControlledSuperlinear, GeneralPersistence };

const char* to_string(Verdict v);
const char* to_string(Route r);

struct Witnesses {
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<std::uint64_t> K;
  std::optional<double> kappa;
};

struct Evidence {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool certified = false;
  std::string verdict;
  std::string method;
};

struct CriterionReport {
  Verdict verdict = Verdict::Inconclusive;
  Route theorem = Route::None;
  Witnesses witnesses;
  std::vector<Evidence> evidence;
};

struct ClassifyOptions {
  std::size_t truncation = kDefaultTruncation;
  LambdaSearch search;
  std::uint64_t kappa_horizon = 10'000;
  bool check_uniqueness = true;
};

/// Decision cascade:
///   1. certified divergence of sum 1/F^2            -> NoPersistentHub
///   2. certified sum 1/x^2 < inf and a finite-sum lambda (with alpha, K)
///                                                   -> UniquePersistentHub (Malthusian route)
///   3. deterministic rule with a global kappa       -> UniquePersistentHub (controlled superlinear)
///   4. alpha, K found with uniqueness checks off    -> PersistentHub
///   otherwise Inconclusive.
CriterionReport classify(const AttachmentSpec& spec, const ClassifyOptions& options = {});

nlohmann::json to_json(const SeriesBound& s);
nlohmann::json to_json(const CriterionReport& report);

}  // namespace hubforge::criteria
