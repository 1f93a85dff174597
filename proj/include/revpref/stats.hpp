#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace revpref {

// Monte Carlo mean with its standard error.
struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

McEstimate mean_and_stderr(std::span<const double> xs);

// Binomial proportion hits/n with stderr sqrt(p(1-p)/n).
McEstimate proportion(std::size_t hits, std::size_t n);

// Spearman rank correlation (average ranks for ties).
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Exact one-sided p-value P(rho >= observed) under random permutation of y.
// Enumerates all permutations; intended for n <= 10.
double spearman_pvalue_greater(std::span<const double> x, std::span<const double> y);

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Asymptotic p-value of the KS statistic d for sample size n (Stephens' correction).
double ks_pvalue(double d, std::size_t n);

}  // namespace revpref
