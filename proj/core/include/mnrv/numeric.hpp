#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mnrv {

// Pairwise summation, fixed order: the result depends only on the input sequence.
double pairwise_sum(std::span<const double> x);

namespace detail {
template <class F>
double pairwise_range(std::size_t lo, std::size_t hi, F& term) {
  std::size_t n = hi - lo;
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  std::size_t mid = lo + n / 2;
  return pairwise_range(lo, mid, term) + pairwise_range(mid, hi, term);
}
}  // namespace detail

// Pairwise sum of term(0..n-1).
template <class F>
double pairwise_sum_of(std::size_t n, F&& term) {
  return detail::pairwise_range(0, n, term);
}

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // 1/(n-1)
double sample_covariance(std::span<const double> x, std::span<const double> y);
double correlation(std::span<const double> x, std::span<const double> y);

// Normal and chi-squared quantiles.
double normal_quantile(double p);
double chi2_upper_pvalue(double stat, double dof);

}  // namespace mnrv
