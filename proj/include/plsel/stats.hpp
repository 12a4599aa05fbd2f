#pragma once

// Small statistical helpers used by inference and the Monte Carlo runners.

#include <span>
#include <vector>

namespace plsel::stats {

double normal_cdf(double x);
double normal_quantile(double p);
double student_t_quantile(double p, double df);

double mean(std::span<const double> v);
double median(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> v);

/// sqrt(p (1 - p) / n).
double binomial_se(double p, int n);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - Phi|
  double p_value = 1.0;
  int n = 0;
};

/// One-sample Kolmogorov-Smirnov test against the standard normal.
KsResult ks_test_normal(std::span<const double> sample);

/// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// Asymptotic two-sided p-value for statistic d on n points, with the
/// Stephens small-sample correction.
double ks_p_value(double d, int n);

/// Average ranks, ties sharing the mean rank.
std::vector<double> ranks(std::span<const double> v);

/// Spearman rank correlation; NaN if either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r_squared = 0.0;
  double ci_lo = 0.0;  // 95% t interval for the slope
  double ci_hi = 0.0;
};

/// Ordinary least squares y = intercept + slope * x (needs >= 3 points).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// One-sided pooled two-proportion z-test of H1: p1 > p2. Returns the p-value.
double two_proportion_greater_p(int k1, int n1, int k2, int n2);

}  // namespace plsel::stats
