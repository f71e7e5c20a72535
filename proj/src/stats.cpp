#include "hubforge/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "hubforge/error.hpp"

namespace hubforge::stats {

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  out.count = n;
  out.mean = mean;
  if (n > 1) out.standard_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

double chi_square_sf(double x, int dof) {
  if (dof <= 0) return 1.0;
  if (!(x > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

ChiSquare chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs) {
  if (observed.size() != probs.size() || observed.empty())
    throw Error(ErrorCode::Precondition, "chi-square: observed and probability vectors must match");
  double n = 0.0;
  for (auto o : observed) n += static_cast<double>(o);
  ChiSquare out;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probs[i] <= 0.0) {
      if (observed[i] != 0) out.statistic = INFINITY;
      continue;
    }
    const double e = n * probs[i];
    const double d = static_cast<double>(observed[i]) - e;
    out.statistic += d * d / e;
    ++cells;
  }
  out.dof = cells - 1;
  out.p_value = std::isinf(out.statistic) ? 0.0 : chi_square_sf(out.statistic, out.dof);
  return out;
}

ChiSquare chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                double min_expected) {
  const std::size_t bins = std::max(a.size(), b.size());
  auto at = [](std::span<const std::uint64_t> v, std::size_t i) -> double {
    return i < v.size() ? static_cast<double>(v[i]) : 0.0;
  };
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    na += at(a, i);
    nb += at(b, i);
  }
  ChiSquare out;
  if (na == 0.0 || nb == 0.0) return out;
  const double fa = na / (na + nb), fb = nb / (na + nb);

  // Pool adjacent bins; a trailing under-filled group merges into the previous one.
  std::vector<std::pair<double, double>> cells;
  double ca = 0.0, cb = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    ca += at(a, i);
    cb += at(b, i);
    const double total = ca + cb;
    if (total * fa >= min_expected && total * fb >= min_expected) {
      cells.emplace_back(ca, cb);
      ca = cb = 0.0;
    }
  }
  if (ca + cb > 0.0) {
    if (cells.empty()) {
      cells.emplace_back(ca, cb);
    } else {
      cells.back().first += ca;
      cells.back().second += cb;
    }
  }
  if (cells.size() < 2) return out;
  for (auto [oa, ob] : cells) {
    const double total = oa + ob;
    const double ea = total * fa, eb = total * fb;
    out.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  out.dof = static_cast<int>(cells.size()) - 1;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double median(std::vector<double> xs) {
  if (xs.empty()) return NAN;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace hubforge::stats
