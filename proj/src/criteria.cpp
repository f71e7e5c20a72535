#include "hubforge/criteria.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "hubforge/error.hpp"

namespace hubforge::criteria {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Neumaier {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

struct Tail {
  bool diverges = false;
  double lo = 0.0;
  double hi = 0.0;
};

// sum_{j>n} 1/g(j)^2 by the integral test.
Tail inverse_square_tail(const Envelope& g, double n) {
  if (g.shape == Envelope::Shape::Linear) {
    const double a = g.x, b = g.y;
    if (a <= 0.0) return {true};
    if (a * n + b <= 0.0) return {true};
    return {false, 1.0 / (a * (a * (n + 1.0) + b)), 1.0 / (a * (a * n + b))};
  }
  const double c = g.x, p = g.y;
  if (2.0 * p <= 1.0) return {true};
  const double k = (2.0 * p - 1.0) * c * c;
  return {false, std::pow(n + 2.0, 1.0 - 2.0 * p) / k, std::pow(n + 1.0, 1.0 - 2.0 * p) / k};
}

bool lower_holds(const AttachmentSpec& spec, const Envelope& env, std::size_t n) {
  for (std::size_t j = env.valid_from; j <= n; ++j) {
    const double e = env(static_cast<double>(j));
    if (spec.lower_envelope(static_cast<Degree>(j)) < e * (1.0 - 1e-12)) return false;
  }
  return true;
}

bool upper_holds(const AttachmentSpec& spec, const Envelope& env, std::size_t n) {
  for (std::size_t j = env.valid_from; j <= n; ++j) {
    const double e = env(static_cast<double>(j));
    if (spec.upper_bound(static_cast<Degree>(j)) > e * (1.0 + 1e-12)) return false;
  }
  return true;
}

std::size_t horizon_for(const AttachmentSpec& spec, std::size_t n) {
  if (auto e = spec.lower_envelope_law()) n = std::max(n, e->valid_from);
  if (auto e = spec.upper_envelope_law()) n = std::max(n, e->valid_from);
  return n;
}

// Tail of the Laplace-product series past index n, given P_n = prod_{j<=n}.
// Upper bound from an envelope g >= F.
double laplace_tail_upper(const Envelope& g, double n, double lambda, double pn) {
  if (g.is_bounded()) {
    const double top = g(n + 1.0);
    if (top <= 0.0) return 0.0;
    return pn * top / lambda;
  }
  double a, b;
  if (g.shape == Envelope::Shape::Linear) {
    a = g.x;
    b = g.y;
  } else {
    if (g.y > 1.0) return kInf;
    a = g.x;
    b = g.x;
  }
  const double s = lambda / a, beta = b / a;
  if (s <= 1.0 || n + 1.0 + beta <= 0.0) return kInf;
  return pn * (n + 1.0 + beta) / (s - 1.0);
}

// Lower bound from an envelope h <= F; kInf certifies divergence.
double laplace_tail_lower(const Envelope& h, double n, double lambda, double pn) {
  if (h.shape == Envelope::Shape::Power && h.y > 1.0 && h.x > 0.0) return kInf;
  if (h.shape == Envelope::Shape::Linear && h.x > 0.0) {
    const double s = lambda / h.x, beta = h.y / h.x;
    if (n + 1.0 + beta <= 0.0) return 0.0;
    if (s <= 1.0) return pn > 0.0 ? kInf : 0.0;
    return pn * (n + 1.0 + beta) / (s - 1.0);
  }
  double floor_value = 0.0;
  if (h.shape == Envelope::Shape::Linear && h.x == 0.0) floor_value = h.y;
  if (h.shape == Envelope::Shape::Power && h.y >= 0.0) floor_value = h.x;
  if (floor_value <= 0.0) return 0.0;
  return pn * floor_value / lambda;
}

nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Converges: return "converges";
    case SeriesVerdict::Diverges: return "diverges";
    case SeriesVerdict::Unknown: return "unknown";
  }
  return "unknown";
}

double SeriesBound::estimate() const {
  if (std::isfinite(tail_upper)) return partial + 0.5 * (tail_lower + tail_upper);
  if (std::isfinite(tail_lower)) return partial + tail_lower;
  return kInf;
}

SeriesBound inverse_square_sum(const AttachmentSpec& spec, std::size_t truncation) {
  SeriesBound out;
  const std::size_t n = horizon_for(spec, truncation);
  out.truncation = n;
  Neumaier acc;
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = spec.lower_envelope(static_cast<Degree>(j));
    acc.add(1.0 / (x * x));
  }
  out.partial = acc.value();
  out.rounding = 4.0 * kEps * out.partial;

  const auto lo = spec.lower_envelope_law();
  const auto up = spec.upper_envelope_law();
  if (up && upper_holds(spec, *up, n)) {
    const Tail t = inverse_square_tail(*up, static_cast<double>(n));
    if (t.diverges) {
      out.tail_lower = kInf;
      out.verdict = SeriesVerdict::Diverges;
      out.certified = true;
      out.method = "integral-test:upper-envelope";
      return out;
    }
    out.tail_lower = t.lo;
  }
  if (lo && lower_holds(spec, *lo, n)) {
    const Tail t = inverse_square_tail(*lo, static_cast<double>(n));
    if (!t.diverges) {
      out.tail_upper = t.hi;
      out.verdict = SeriesVerdict::Converges;
      out.certified = true;
      out.method = "integral-test:lower-envelope";
    }
  }
  return out;
}

SeriesBound malthus_sum(const AttachmentSpec& spec, double lambda, std::size_t truncation) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::Precondition, "malthus_sum: lambda must be positive and finite");
  SeriesBound out;
  const auto lo = spec.lower_envelope_law();
  const auto up = spec.upper_envelope_law();
  const std::size_t floor_n = horizon_for(spec, 0);

  Neumaier acc;
  double log_p = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0;; ++i) {
    log_p += spec.log_laplace_factor(static_cast<Degree>(i), lambda);
    acc.add(std::exp(log_p));
    n = i;
    if (i >= truncation && i >= floor_n) break;
    if (log_p < -745.0 && i >= floor_n) break;
  }
  out.partial = acc.value();
  out.truncation = n;
  // Each log-factor carries a relative error of a few ulps; term i inherits i of them.
  out.rounding = 4.0 * kEps * static_cast<double>(n + 1) * out.partial;
  const double pn = std::exp(log_p);
  const double dn = static_cast<double>(n);

  if (lo && lower_holds(spec, *lo, n)) {
    out.tail_lower = laplace_tail_lower(*lo, dn, lambda, pn);
    if (std::isinf(out.tail_lower)) {
      out.verdict = SeriesVerdict::Diverges;
      out.certified = true;
      out.method = "minorant:lower-envelope";
      return out;
    }
  }
  if (up && upper_holds(spec, *up, n)) {
    out.tail_upper = laplace_tail_upper(*up, dn, lambda, pn);
    if (std::isfinite(out.tail_upper)) {
      out.verdict = SeriesVerdict::Converges;
      out.certified = true;
      out.method = up->is_bounded() ? "geometric:upper-envelope" : "gamma-telescoping:upper-envelope";
    }
  }
  return out;
}

std::optional<LambdaWitness> find_lambda(const AttachmentSpec& spec, LambdaTarget target,
                                         const LambdaSearch& search) {
  auto meets = [&](double lambda, SeriesBound& sb) {
    sb = malthus_sum(spec, lambda, search.truncation);
    if (!sb.certified || sb.verdict != SeriesVerdict::Converges) return false;
    return target == LambdaTarget::Finite || sb.upper() < 1.0;
  };
  SeriesBound sb;
  if (meets(search.lo, sb)) return LambdaWitness{search.lo, sb};
  SeriesBound best;
  if (!meets(search.hi, best)) return std::nullopt;
  double lo = search.lo, hi = search.hi;
  for (int it = 0; it < search.iterations; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (meets(mid, sb)) {
      hi = mid;
      best = sb;
    } else {
      lo = mid;
    }
  }
  return LambdaWitness{hi, best};
}

std::optional<AlphaK> alpha_K_search(const AttachmentSpec& spec, const LambdaSearch& search,
                                     std::size_t truncation) {
  const SeriesBound isq = inverse_square_sum(spec, truncation);
  if (!isq.certified || isq.verdict != SeriesVerdict::Converges) return std::nullopt;
  const auto w = find_lambda(spec, LambdaTarget::LessThanOne, search);
  if (!w) return std::nullopt;
  const double alpha = w->lambda;
  const auto lo = spec.lower_envelope_law();

  const std::size_t n = isq.truncation;
  std::vector<double> suffix(n + 2, 0.0);
  suffix[n + 1] = isq.tail_upper;
  for (std::size_t j = n + 1; j-- > 0;) {
    const double x = spec.lower_envelope(static_cast<Degree>(j));
    suffix[j] = suffix[j + 1] + 1.0 / (x * x);
  }
  auto eta = [](double s) { return std::sqrt(1.0 / (2.0 * s)); };

  AlphaK out{};
  out.alpha = alpha;
  out.laplace_sum = w->sum;
  std::uint64_t K = 0;
  for (std::size_t k = 1; k <= n + 1; ++k) {
    if (eta(suffix[k]) >= alpha) {
      K = k;
      out.eta_K = eta(suffix[k]);
      break;
    }
  }
  if (K == 0) {
    // Past the horizon only the envelope tail is left.
    for (double k = static_cast<double>(n + 2); k < 9e18; k *= 2.0) {
      const Tail t = inverse_square_tail(*lo, k - 1.0);
      if (eta(t.hi) >= alpha) {
        K = static_cast<std::uint64_t>(k);
        out.eta_K = eta(t.hi);
        break;
      }
    }
    if (K == 0) return std::nullopt;
  }
  out.K = K;

  // log E e^{alpha (X' - X)} <= 4 alpha^2 / x^2 once x^2 >= 2 alpha^2.
  double log_product = 0.0;
  if (K <= n) {
    Neumaier acc;
    for (std::size_t i = K; i <= n; ++i)
      acc.add(spec.log_symmetric_diff_moment(static_cast<Degree>(i), alpha));
    log_product = acc.value() + 4.0 * alpha * alpha * isq.tail_upper;
  } else {
    log_product = 4.0 * alpha * alpha * inverse_square_tail(*lo, static_cast<double>(K) - 1.0).hi;
  }
  out.log_product_upper = log_product;
  return out;
}

KappaReport kappa_of(const AttachmentSpec& spec, std::uint64_t horizon) {
  if (spec.is_random())
    throw Error(ErrorCode::UnsupportedSpec, "kappa is defined for deterministic rules only");
  KappaReport out;
  out.horizon = horizon;
  double running_max = 0.0, prev = 0.0;
  bool monotone = true;
  for (std::uint64_t k = 0; k <= horizon; ++k) {
    const double r = spec.evaluate(static_cast<Degree>(k)) / static_cast<double>(k + 1);
    if (k > 0 && r < prev * (1.0 - 1e-12)) monotone = false;
    running_max = std::max(running_max, r);
    const double kap = running_max / r;
    if (kap > out.kappa_horizon) {
      out.kappa_horizon = kap;
      out.argmax = k;
    }
    prev = r;
  }
  out.nondecreasing_on_horizon = monotone;

  if (const auto* p = std::get_if<AttachmentSpec::Power>(&spec.kind()); p && p->p >= 1.0) {
    out.certified_global = true;
    out.kappa_global = 1.0;
    out.basis = "power-exponent-at-least-one";
  } else if (const auto* l = std::get_if<AttachmentSpec::Linear>(&spec.kind()); l && l->a > 0.0) {
    out.certified_global = true;
    out.kappa_global = std::max(1.0, l->b / l->a);
    out.basis = "linear-ratio-monotone";
  } else if (auto d = spec.declared_kappa(); d && *d >= out.kappa_horizon) {
    out.certified_global = true;
    out.kappa_global = *d;
    out.basis = "declared-and-verified-on-horizon";
  } else {
    out.basis = "horizon-only";
  }
  return out;
}

ThreeSeries three_series_check(const AttachmentSpec& spec, double cutoff, std::size_t truncation) {
  if (!(cutoff > 0.0)) throw Error(ErrorCode::Precondition, "three_series_check: cutoff must be positive");
  using boost::math::gamma_p;
  ThreeSeries out;
  out.cutoff = cutoff;
  const double C = cutoff;
  const SeriesBound isq = inverse_square_sum(spec, truncation);
  const std::size_t n = isq.truncation;

  // E[D 1{0<D<=C}] for D = X - X', X ~ Exp(a), X' ~ Exp(b).
  auto pos_mean = [C](double a, double b) { return a * b / (a + b) / (a * a) * gamma_p(2.0, a * C); };

  Neumaier s1, s2, s3;
  for (std::size_t d = 0; d <= n; ++d) {
    const auto support = spec.rate_support(static_cast<Degree>(d));
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      for (std::size_t j = 0; j < support.size(); ++j) {
        const auto [a, pa] = support[i];
        const auto [b, pb] = support[j];
        const double w = pa * pb;
        t1 += w * (b / (a + b) * std::exp(-a * C) + a / (a + b) * std::exp(-b * C));
        t3 += w * a * b / (a + b) *
              (2.0 / (a * a * a) * gamma_p(3.0, a * C) + 2.0 / (b * b * b) * gamma_p(3.0, b * C));
        t2 += w * (pos_mean(a, b) - pos_mean(b, a));
      }
    }
    s1.add(t1);
    s2.add(t2);
    s3.add(t3 - t2 * t2);
  }
  for (auto* sb : {&out.tail_probability, &out.truncated_mean, &out.truncated_variance})
    sb->truncation = n;
  out.tail_probability.partial = s1.value();
  out.truncated_mean.partial = s2.value();
  out.truncated_variance.partial = s3.value();
  out.truncated_mean.tail_upper = 0.0;
  out.truncated_mean.verdict = SeriesVerdict::Converges;
  out.truncated_mean.certified = true;
  out.truncated_mean.method = "symmetry";

  if (isq.certified && isq.verdict == SeriesVerdict::Converges) {
    out.tail_probability.tail_upper = 4.0 * isq.tail_upper / (C * C);
    out.truncated_variance.tail_upper = 4.0 * isq.tail_upper;
    for (auto* sb : {&out.tail_probability, &out.truncated_variance}) {
      sb->verdict = SeriesVerdict::Converges;
      sb->certified = true;
      sb->method = "chebyshev:inverse-square";
    }
    out.verdict = SeriesVerdict::Converges;
    out.certified = true;
  } else if (isq.certified && isq.verdict == SeriesVerdict::Diverges && spec.infimum()) {
    out.truncated_variance.tail_lower = kInf;
    out.truncated_variance.verdict = SeriesVerdict::Diverges;
    out.truncated_variance.certified = true;
    out.truncated_variance.method = "minorant:upper-envelope";
    out.verdict = SeriesVerdict::Diverges;
    out.certified = true;
  }
  return out;
}

GammaRatioReport gamma_ratio_bound(double c0, double lambda, std::uint64_t truncation, bool keep_rows) {
  if (!(c0 > 0.0) || !(lambda > 0.0))
    throw Error(ErrorCode::Precondition, "gamma_ratio_bound: C0 and lambda must be positive");
  GammaRatioReport out;
  const double s = lambda / c0;
  out.exponent = s;
  if (keep_rows) out.rows.reserve(truncation + 1);
  Neumaier acc;
  double log_term = 0.0;
  for (std::uint64_t i = 0; i <= truncation; ++i) {
    const double di = static_cast<double>(i);
    log_term -= std::log1p(s / (di + 1.0));
    const double term = std::exp(log_term);
    acc.add(term);
    const double ratio = boost::math::tgamma_delta_ratio(di + 2.0, s);
    const double scaled = std::exp(std::log(ratio) + s * std::log(di + 1.0));
    out.c1 = std::max(out.c1, scaled);
    if (keep_rows) out.rows.push_back({i, term, ratio, scaled});
  }
  out.partial = acc.value();
  if (s > 1.0) {
    const double n = static_cast<double>(truncation);
    out.exact_tail = std::exp(log_term) * (n + 2.0) / (s - 1.0);
    out.exact_total = 1.0 / (s - 1.0);
    out.summed_bound = out.c1 * std::tgamma(1.0 + s) * boost::math::zeta(s);
    out.bound_finite = std::isfinite(out.summed_bound);
  } else {
    out.exact_tail = kInf;
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::NoPersistentHub: return "no-persistent-hub";
    case Verdict::UniquePersistentHub: return "unique-persistent-hub";
    case Verdict::PersistentHub: return "persistent-hub";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const char* to_string(Route r) {
  switch (r) {
    case Route::None: return "none";
    case Route::InverseSquareDivergence: return "inverse-square-divergence";
    case Route::MalthusianSum: return "malthusian-sum-criterion";
    case Route::ControlledSuperlinear: return "controlled-superlinear";
    case Route::GeneralPersistence: return "general-cmj-persistence";
  }
  return "none";
}

namespace {

Evidence series_evidence(std::string name, const SeriesBound& s) {
  Evidence e;
  e.name = std::move(name);
  e.value = s.estimate();
  e.lower = s.lower();
  e.upper = s.upper();
  e.certified = s.certified;
  e.verdict = to_string(s.verdict);
  e.method = s.method;
  return e;
}

}  // namespace

CriterionReport classify(const AttachmentSpec& spec, const ClassifyOptions& options) {
  CriterionReport report;
  const SeriesBound isq = inverse_square_sum(spec, options.truncation);
  report.evidence.push_back(series_evidence("inverse-square-sum", isq));

  if (isq.certified && isq.verdict == SeriesVerdict::Diverges) {
    report.verdict = Verdict::NoPersistentHub;
    report.theorem = Route::InverseSquareDivergence;
    return report;
  }

  std::optional<KappaReport> kappa;
  if (!spec.is_random()) {
    kappa = kappa_of(spec, options.kappa_horizon);
    Evidence e;
    e.name = "kappa";
    e.value = kappa->kappa_horizon;
    e.lower = kappa->kappa_horizon;
    e.upper = kappa->kappa_global.value_or(kInf);
    e.certified = kappa->certified_global;
    e.verdict = kappa->certified_global ? "bounded" : "unknown";
    e.method = kappa->basis;
    report.evidence.push_back(e);
    if (kappa->certified_global) report.witnesses.kappa = kappa->kappa_global;
  }

  if (isq.certified && isq.verdict == SeriesVerdict::Converges) {
    const auto finite = find_lambda(spec, LambdaTarget::Finite, options.search);
    if (finite) {
      report.evidence.push_back(series_evidence("malthusian-sum-at-lambda", finite->sum));
      const auto ak = alpha_K_search(spec, options.search, options.truncation);
      if (ak && ak->log_product_upper <= 2.0) {
        report.evidence.push_back(series_evidence("malthusian-sum-at-alpha", ak->laplace_sum));
        Evidence eta;
        eta.name = "eta-K";
        eta.value = ak->eta_K;
        eta.lower = ak->alpha;
        eta.upper = ak->eta_K;
        eta.certified = true;
        eta.verdict = "eta-K>=alpha";
        eta.method = "suffix-sum:lower-envelope";
        report.evidence.push_back(eta);
        Evidence prod;
        prod.name = "moment-product";
        prod.value = std::exp(ak->log_product_upper);
        prod.lower = 0.0;
        prod.upper = ak->product_bound;
        prod.certified = ak->log_product_upper <= 2.0;
        prod.verdict = prod.certified ? "below-e^2" : "exceeds-e^2";
        prod.method = "log-space:exact-moments+inverse-square-tail";
        report.evidence.push_back(prod);

        report.witnesses.lambda = finite->lambda;
        report.witnesses.alpha = ak->alpha;
        report.witnesses.K = ak->K;
        if (options.check_uniqueness) {
          report.verdict = Verdict::UniquePersistentHub;
          report.theorem = Route::MalthusianSum;
        } else {
          report.verdict = Verdict::PersistentHub;
          report.theorem = Route::GeneralPersistence;
        }
        return report;
      }
    }
  }

  if (kappa && kappa->certified_global && isq.certified && isq.verdict == SeriesVerdict::Converges) {
    report.verdict = Verdict::UniquePersistentHub;
    report.theorem = Route::ControlledSuperlinear;
    return report;
  }
  return report;
}

nlohmann::json to_json(const SeriesBound& s) {
  return {{"partial", num(s.partial)},       {"tail_lower", num(s.tail_lower)},
          {"tail_upper", num(s.tail_upper)}, {"lower", num(s.lower())},
          {"upper", num(s.upper())},         {"estimate", num(s.estimate())},
          {"truncation", s.truncation},      {"rounding", num(s.rounding)},
          {"verdict", to_string(s.verdict)},
          {"certified", s.certified},        {"method", s.method}};
}

nlohmann::json to_json(const CriterionReport& report) {
  nlohmann::json w = nlohmann::json::object();
  w["lambda"] = report.witnesses.lambda ? num(*report.witnesses.lambda) : nlohmann::json(nullptr);
  w["alpha"] = report.witnesses.alpha ? num(*report.witnesses.alpha) : nlohmann::json(nullptr);
  w["K"] = report.witnesses.K ? nlohmann::json(*report.witnesses.K) : nlohmann::json(nullptr);
  w["kappa"] = report.witnesses.kappa ? num(*report.witnesses.kappa) : nlohmann::json(nullptr);
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : report.evidence) {
    ev.push_back({{"name", e.name},
                  {"value", num(e.value)},
                  {"lower", num(e.lower)},
                  {"upper", num(e.upper)},
                  {"certified", e.certified},
                  {"verdict", e.verdict},
                  {"method", e.method}});
  }
  return {{"verdict", to_string(report.verdict)},
          {"theorem", to_string(report.theorem)},
          {"witnesses", w},
          {"evidence", ev}};
}

}  // namespace hubforge::criteria
