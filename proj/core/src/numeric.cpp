#include "mnrv/numeric.hpp"

#include <gsl/gsl_cdf.h>

#include <cmath>

#include "mnrv/error.hpp"

namespace mnrv {

double pairwise_sum(std::span<const double> x) {
  return pairwise_sum_of(x.size(), [&](std::size_t i) { return x[i]; });
}

double mean(std::span<const double> x) {
  require(!x.empty(), "mean of empty series");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) { return sample_covariance(x, x); }

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "covariance needs two equal series of length >= 2");
  double mx = mean(x), my = mean(y);
  double s = pairwise_sum_of(x.size(), [&](std::size_t i) { return (x[i] - mx) * (y[i] - my); });
  return s / static_cast<double>(x.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y) {
  double sxy = sample_covariance(x, y);
  double sxx = sample_covariance(x, x);
  double syy = sample_covariance(y, y);
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "quantile probability must be in (0,1)");
  return gsl_cdf_ugaussian_Pinv(p);
}

double chi2_upper_pvalue(double stat, double dof) { return gsl_cdf_chisq_Q(stat, dof); }

}  // namespace mnrv
