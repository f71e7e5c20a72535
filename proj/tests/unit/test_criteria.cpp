#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hubforge/criteria.hpp"
#include "hubforge/error.hpp"
#include "hubforge/spec_text.hpp"

using namespace hubforge;
using namespace hubforge::criteria;

namespace {

// sum_{i>=0} prod_{j<=i} (j+1)/(j+1+l) = 1/(l-1) for l > 1
double linear_malthus(double l) { return 1.0 / (l - 1.0); }

double simpson(auto f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("inverse square sum brackets its closed form") {
  auto s = inverse_square_sum(AttachmentSpec::linear(1, 1), 100000);
  const double pi2_6 = std::numbers::pi * std::numbers::pi / 6;
  CHECK(s.certified);
  CHECK(s.verdict == SeriesVerdict::Converges);
  CHECK(s.lower() <= pi2_6);
  CHECK(s.upper() >= pi2_6);
  CHECK(s.upper() - s.lower() < 1e-9);

  auto p = inverse_square_sum(AttachmentSpec::power(2, 1), 1000);
  const double zeta4 = std::pow(std::numbers::pi, 4) / 90;
  CHECK(p.lower() <= zeta4);
  CHECK(p.upper() >= zeta4);

  auto c = inverse_square_sum(AttachmentSpec::constant(1), 1000);
  CHECK(c.verdict == SeriesVerdict::Diverges);
  CHECK(c.certified);
  auto sq = inverse_square_sum(AttachmentSpec::power(0.5, 1), 1000);
  CHECK(sq.verdict == SeriesVerdict::Diverges);
}

TEST_CASE("malthus sum telescopes for linear(1,1)") {
  for (double l : {1.5, 2.0, 3.0, 7.0}) {
    CAPTURE(l);
    auto s = malthus_sum(AttachmentSpec::linear(1, 1), l, 100000);
    CHECK(s.certified);
    CHECK(s.lower() <= linear_malthus(l) + 1e-12);
    CHECK(s.upper() >= linear_malthus(l) - 1e-12);
    CHECK(std::abs(s.estimate() - linear_malthus(l)) < 1e-9);
  }
  auto at3 = malthus_sum(AttachmentSpec::linear(1, 1), 3.0);
  CHECK(std::abs(at3.lower() - 0.5) <= 1e-9);
  CHECK(std::abs(at3.upper() - 0.5) <= 1e-9);
  CHECK_THROWS_AS(malthus_sum(AttachmentSpec::linear(1, 1), 0.0), Error);
}

TEST_CASE("malthus sum for constant rules is geometric") {
  // prod of c/(c+l) over i+1 factors; the sum is c/l
  auto s = malthus_sum(AttachmentSpec::constant(2), 3.0, 1000);
  CHECK(s.verdict == SeriesVerdict::Converges);
  CHECK(s.lower() <= 2.0 / 3.0);
  CHECK(s.upper() >= 2.0 / 3.0);
  CHECK(s.upper() - s.lower() < 1e-9);
}

TEST_CASE("malthus sum divergence") {
  auto s = malthus_sum(AttachmentSpec::linear(1, 1), 0.9, 1000);
  CHECK(s.verdict == SeriesVerdict::Diverges);
  // superlinear: the products stay bounded away from zero
  for (double l : {1.0, 100.0}) {
    auto q = malthus_sum(AttachmentSpec::power(2, 1), l, 1000);
    CHECK(q.verdict == SeriesVerdict::Diverges);
    CHECK(q.certified);
  }
}

TEST_CASE("lambda search brackets the thresholds") {
  auto one = find_lambda(AttachmentSpec::linear(1, 1), LambdaTarget::LessThanOne);
  REQUIRE(one);
  CHECK(one->lambda > 2.0);
  CHECK(one->lambda < 2.0 + 1e-6);
  CHECK(one->sum.upper() < 1.0);
  auto fin = find_lambda(AttachmentSpec::linear(1, 1), LambdaTarget::Finite);
  REQUIRE(fin);
  CHECK(fin->lambda >= 1.0);
  CHECK(fin->lambda < 1.0 + 1e-6);
}

TEST_CASE("alpha and K witnesses") {
  auto ak = alpha_K_search(AttachmentSpec::linear(1, 1));
  REQUIRE(ak);
  CHECK(ak->alpha > 2.0);
  CHECK(ak->laplace_sum.upper() < 1.0);
  CHECK(ak->eta_K >= ak->alpha);
  CHECK(ak->log_product_upper <= 2.0);
  // eta_K = sqrt(1/(2 sum_{i>=K} (i+1)^{-2}))
  double tail = 0;
  for (std::uint64_t i = ak->K; i < 10'000'000; ++i) tail += 1.0 / ((i + 1.0) * (i + 1.0));
  tail += 1.0 / 10'000'000.0;
  CHECK(ak->eta_K == doctest::Approx(std::sqrt(1 / (2 * tail))).epsilon(1e-6));
  CHECK_FALSE(alpha_K_search(AttachmentSpec::constant(1)));
}

TEST_CASE("kappa") {
  auto p = kappa_of(AttachmentSpec::power(2, 1), 1000);
  CHECK(p.kappa_horizon == doctest::Approx(1.0));
  CHECK(p.certified_global);
  auto l = kappa_of(AttachmentSpec::linear(1, 3), 1000);
  CHECK(*l.kappa_global == doctest::Approx(3.0));
  CHECK(l.kappa_horizon <= 3.0);
  auto par = kappa_of(parse_spec("parity-example"), 10000);
  CHECK(par.kappa_horizon >= 1.5);
  CHECK(par.kappa_horizon <= 2.0);
  CHECK(par.certified_global);
  CHECK_FALSE(par.nondecreasing_on_horizon);
  // brute force over all pairs i <= n
  auto spec = parse_spec("parity-example");
  double brute = 0;
  for (int n = 0; n <= 300; ++n)
    for (int i = 0; i <= n; ++i)
      brute = std::max(brute, (spec.evaluate(i) / (i + 1)) / (spec.evaluate(n) / (n + 1)));
  CHECK(kappa_of(spec, 300).kappa_horizon == doctest::Approx(brute));
}

TEST_CASE("three series for linear rules") {
  auto t = three_series_check(AttachmentSpec::linear(1, 1), 1.0, 2000);
  CHECK(t.verdict == SeriesVerdict::Converges);
  CHECK(t.certified);
  CHECK(std::abs(t.truncated_mean.partial) < 1e-12);
  // equal rates: P(|D| > C) = e^{-aC}, E[D^2; |D| <= C] = a^{-2} int_0^{aC} u^2 e^{-u} du
  double p = 0, v = 0;
  for (std::size_t d = 0; d <= t.tail_probability.truncation; ++d) {
    const double a = d + 1.0;
    p += std::exp(-a);
    v += simpson([](double u) { return u * u * std::exp(-u); }, 0.0, std::min(a, 80.0), 4000) / (a * a);
  }
  CHECK(t.tail_probability.partial == doctest::Approx(p).epsilon(1e-9));
  CHECK(t.truncated_variance.partial == doctest::Approx(v).epsilon(1e-6));
}

TEST_CASE("three series diverges for constant rules") {
  auto t = three_series_check(AttachmentSpec::constant(1), 1.0, 1000);
  CHECK(t.verdict == SeriesVerdict::Diverges);
  CHECK_THROWS_AS(three_series_check(AttachmentSpec::constant(1), 0.0), Error);
}

TEST_CASE("gamma ratio") {
  auto r = gamma_ratio_bound(1.0, 1.0, 50);
  for (const auto& row : r.rows) CHECK(row.ratio == doctest::Approx(1.0 / (row.i + 2.0)));
  CHECK_FALSE(r.bound_finite);

  auto g = gamma_ratio_bound(1.0, 2.5, 200000, false);
  double direct = 0, term = 1;
  for (int i = 0; i <= 200000; ++i) {
    term *= (i + 1.0) / (i + 1.0 + 2.5);
    direct += term;
  }
  CHECK(g.partial == doctest::Approx(direct).epsilon(1e-12));
  CHECK(g.partial + g.exact_tail == doctest::Approx(1.0 / 1.5).epsilon(1e-9));
  CHECK(g.exact_total == doctest::Approx(1.0 / 1.5));
  CHECK(g.bound_finite);
  CHECK(g.summed_bound >= g.exact_total);
  for (const auto& row : gamma_ratio_bound(2.0, 5.0, 100).rows)
    CHECK(row.scaled_ratio == doctest::Approx(row.ratio * std::pow(row.i + 1.0, 2.5)));
}

TEST_CASE("classifier table") {
  struct Row {
    const char* spec;
    Verdict verdict;
    Route route;
  };
  for (auto row : {Row{"constant:c=1", Verdict::NoPersistentHub, Route::InverseSquareDivergence},
                   Row{"power:p=0.5,c=1", Verdict::NoPersistentHub, Route::InverseSquareDivergence},
                   Row{"linear:a=1,b=1", Verdict::UniquePersistentHub, Route::MalthusianSum},
                   Row{"power:p=2,c=1", Verdict::UniquePersistentHub, Route::ControlledSuperlinear},
                   Row{"parity-example", Verdict::UniquePersistentHub, Route::ControlledSuperlinear}}) {
    CAPTURE(row.spec);
    auto rep = classify(parse_spec(row.spec));
    CHECK(rep.verdict == row.verdict);
    CHECK(rep.theorem == row.route);
  }
  auto lin = classify(parse_spec("linear:a=1,b=1"));
  REQUIRE(lin.witnesses.lambda);
  CHECK(*lin.witnesses.lambda <= 3.0);
  auto pw = classify(parse_spec("power:p=2,c=1"));
  CHECK(*pw.witnesses.kappa == 1.0);
  auto par = classify(parse_spec("parity-example"));
  CHECK(*par.witnesses.kappa >= 1.5);
  CHECK(*par.witnesses.kappa <= 2.0);
}

TEST_CASE("report json") {
  auto j = to_json(classify(parse_spec("linear:a=1,b=1")));
  CHECK(j["verdict"] == "unique-persistent-hub");
  CHECK(j["theorem"] == "malthusian-sum-criterion");
  CHECK(j["witnesses"]["lambda"].is_number());
  CHECK(j["evidence"].is_array());
  CHECK(!j["evidence"].empty());
  auto s = to_json(inverse_square_sum(AttachmentSpec::constant(1), 100));
  CHECK(s["tail_upper"] == "inf");
}

TEST_CASE("inverse square sum at a million terms") {
  auto s = inverse_square_sum(AttachmentSpec::linear(1, 1));
  CHECK(s.lower() >= 1.6449);
  CHECK(s.upper() <= 1.6450);
  auto p = inverse_square_sum(AttachmentSpec::power(2, 1), 1000);
  CHECK(p.certified);
  CHECK(p.verdict == SeriesVerdict::Converges);
}

TEST_CASE("malthus sum tends to zero for large lambda") {
  double prev = 1e300;
  for (double l : {10.0, 100.0, 1e4, 1e6}) {
    const double u = malthus_sum(AttachmentSpec::linear(1, 1), l, 1000).upper();
    CHECK(u < prev);
    prev = u;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("lambda search on constant rules") {
  auto fin = find_lambda(AttachmentSpec::constant(1), LambdaTarget::Finite);
  REQUIRE(fin);
  CHECK(fin->sum.upper() < std::numeric_limits<double>::infinity());
  // sum_{i>=1} (1/(1+l))^i = 1/l
  auto at1 = malthus_sum(AttachmentSpec::constant(1), 1.0, 1000);
  CHECK(at1.lower() <= 1.0);
  CHECK(at1.upper() >= 1.0);
  auto one = find_lambda(AttachmentSpec::constant(1), LambdaTarget::LessThanOne);
  REQUIRE(one);
  CHECK(one->lambda > 1.0);
  CHECK(one->lambda < 1.0 + 1e-6);
}

TEST_CASE("alpha and K need a convergent laplace sum") {
  auto lin = alpha_K_search(AttachmentSpec::linear(1, 1));
  REQUIRE(lin);
  CHECK(lin->alpha <= 3.0);
  // superlinear rules have no alpha with the sum below one
  CHECK_FALSE(alpha_K_search(AttachmentSpec::power(2, 1)));
  CHECK_FALSE(find_lambda(AttachmentSpec::power(2, 1), LambdaTarget::LessThanOne));
}

TEST_CASE("constant rules have no kappa certificate") {
  auto c = kappa_of(AttachmentSpec::constant(1), 500);
  CHECK_FALSE(c.certified_global);
  CHECK(c.kappa_horizon == doctest::Approx(501.0));
}

TEST_CASE("gamma ratio at lambda 3 agrees with the telescoping sum") {
  auto g = gamma_ratio_bound(1.0, 3.0, 100000, false);
  CHECK(g.partial + g.exact_tail == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(g.exact_total == doctest::Approx(malthus_sum(AttachmentSpec::linear(1, 1), 3.0).estimate()).epsilon(1e-9));
}

TEST_CASE("malthus sum decreases in lambda") {
  for (auto spec : {AttachmentSpec::linear(1, 1), AttachmentSpec::constant(2), AttachmentSpec::linear(0.5, 2)}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double l = 1.05; l < 50; l *= 1.3) {
      const double v = malthus_sum(spec, l, 20000).estimate();
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("certified tails survive a longer truncation") {
  for (auto spec : {AttachmentSpec::linear(1, 1), AttachmentSpec::power(2, 1), AttachmentSpec::power(1.5, 0.5)}) {
    auto a = inverse_square_sum(spec, 1000);
    auto b = inverse_square_sum(spec, 10000);
    REQUIRE(a.certified);
    CHECK(b.lower() >= a.lower());
    CHECK(b.upper() <= a.upper());
    CHECK(std::abs(b.estimate() - a.estimate()) <= a.upper() - a.lower());
  }
  for (double l : {2.5, 4.0}) {
    auto a = malthus_sum(AttachmentSpec::linear(1, 1), l, 1000);
    auto b = malthus_sum(AttachmentSpec::linear(1, 1), l, 10000);
    REQUIRE(a.certified);
    CHECK(std::abs(b.estimate() - a.estimate()) <= a.upper() - a.lower());
    for (const auto& s : {a, b}) {
      CHECK(s.lower() <= linear_malthus(l));
      CHECK(s.upper() >= linear_malthus(l));
    }
  }
}

TEST_CASE("parity kappa on short horizons") {
  auto spec = parse_spec("parity-example");
  for (std::uint64_t n : {4, 5, 10, 100, 5000}) {
    const auto k = kappa_of(spec, n);
    CHECK(k.kappa_horizon >= 1.5);
    CHECK(k.kappa_horizon <= 2.0);
  }
}

TEST_CASE("huge weights stay finite in log space") {
  auto spec = AttachmentSpec::power(40, 1);
  auto isq = inverse_square_sum(spec, 1000);
  CHECK(std::isfinite(isq.upper()));
  auto m = malthus_sum(spec, 1.0, 1000);
  CHECK(std::isfinite(m.partial));
  CHECK(std::isfinite(spec.log_symmetric_diff_moment(5000, 1.0)));
  CHECK(spec.log_laplace_factor(5000, 1e10) < 0.0);
}
