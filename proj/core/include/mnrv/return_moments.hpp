#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mnrv/market_sim.hpp"

namespace mnrv {

struct ReturnAcov {
  std::size_t m = 0;
  std::vector<double> g;   // G_0..G_L
  std::vector<double> se;  // G_0 / sqrt(n_obs) for every lag
  std::size_t n_obs = 0;
  bool degenerate = false;  // G_0 == 0
};

struct NoiseAcov {
  std::size_t q = 0;
  std::vector<double> omega;  // Omega_0..Omega_q, Omega_0 here already includes sigma_delta^2
  double omega0_plus_delta = 0.0;
};

struct QSelection {
  std::size_t q = 0;
  std::size_t run_start = 0;  // first lag of the run of three insignificant lags
  double critical = 0.0;      // z critical value
  std::size_t lb_lags = 0;
  double lb_stat = 0.0;
  double lb_pvalue = 1.0;
  bool lb_reject = false;
};

// Pooled within-day autocovariance of returns laid out day after day (m per day).
// Mean removal uses the grand mean; lags never pair returns from different days.
ReturnAcov sample_autocov(std::span<const double> returns, std::size_t m, std::size_t max_lag);
ReturnAcov sample_autocov(const IntradayPanel& panel, std::size_t max_lag, std::size_t m = 0);

QSelection select_q(const ReturnAcov& acov, double level = 0.01);

double sigma2_from_returns(std::span<const double> g, std::size_t m, std::size_t q);
double sigma2_from_returns(const ReturnAcov& acov, std::size_t q);
double expected_u_from_data(std::span<const double> ncrv, double sigma2);

// Omega_n (n >= 1) by the backward recursion and Omega_0 + sigma_delta^2 by the closing equation.
// f_m = e_sigma = 0 gives the zero-f identification.
NoiseAcov omega_from_g(std::span<const double> g, std::size_t m, std::size_t q, double f_m = 0.0,
                       double e_sigma = 0.0);
NoiseAcov omega_from_g(const ReturnAcov& acov, std::size_t q, double f_m = 0.0, double e_sigma = 0.0);

// Two algebraically equivalent forms of the closing equation.
struct Omega0Forms {
  double via_g1 = 0.0;   // 2 Omega_1 - Omega_2 - G_1 - f(E[sigma]+f)/m
  double expanded = 0.0; // -sum_k k G_k - f(E[sigma]+f)/m
};
Omega0Forms omega0_forms(std::span<const double> g, std::size_t m, std::size_t q, double f_m, double e_sigma);

// Weak-f closing equation written through G_0 and sigma^2.
double omega0_weak_f(double g0, double sigma2, double omega1, std::size_t m, double f_m, double e_sigma);

// Theoretical return autocovariances G_0..G_{q+2} of the contaminated returns.
std::vector<double> return_acov_theory(double sigma2, std::span<const double> omega, double sigma_delta2,
                                       double f_m, double e_sigma, std::size_t m);

}  // namespace mnrv
