#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hubforge::stats {

struct MeanSe {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
};

/// Welford mean with the standard error of the mean; reduction in input order.
MeanSe mean_se(std::span<const double> xs);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Upper tail P(chi2_dof > x).
double chi_square_sf(double x, int dof);

/// Goodness of fit of observed counts against exact cell probabilities.
ChiSquare chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs);

/// Two-sample homogeneity test on histograms over the same bins. Adjacent
/// bins are pooled left to right until every pooled cell has an expected count
/// of at least `min_expected` in both samples.
ChiSquare chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                double min_expected = 5.0);

struct Interval {
  double lower;
  double upper;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

double median(std::vector<double> xs);

}  // namespace hubforge::stats
