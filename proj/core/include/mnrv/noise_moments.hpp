#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mnrv/market_sim.hpp"

namespace mnrv {

struct UMoments {
  double mean = 0.0;
  double variance = 0.0;
  double lag1 = 0.0;
  std::vector<double> higher;  // Cov[u_t, u_{t+k}] for k = 2, 3, ...
};

struct Ma1Params {
  double c_u = 0.0;
  double theta_u = 0.0;
  double sigma_xi2 = 0.0;
};

struct NwMoments {
  UMoments u;
  Ma1Params ma1;
  double A = 0.0;
};

// IID noise with variance sigma_eps2 and Var[eps^2] = omega_eps2.
NwMoments nw_u_moments(double sigma2, double sigma_eps2, double omega_eps2, double m);

double gamma_n(std::span<const double> omega, std::size_t n);

// Cov[e_t^2, e_{t+n}^2] for the noise return e_t = eps_t - eps_{t-1}.
// omega_delta is E[delta^4].
double c3_family(std::span<const double> omega, double sigma_delta2, double omega_delta, double f_m,
                 std::size_t m, std::size_t n);

enum class UMode { exact_f0, weak_f };

struct UMomentInputs {
  double sigma2 = 0.0;
  std::vector<double> omega;  // Omega_0..Omega_q
  double sigma_delta2 = 0.0;
  double omega_delta = 0.0;  // E[delta^4]
  double f_m = 0.0;
  double e_sigma = 0.0;
  std::size_t m = 1;
};

UMoments u_moments(const UMomentInputs& in, UMode mode);
UMoments u_moments_dependent(const SrSarvParams& sr, const NoiseParams& noise, std::size_t m, UMode mode);

Ma1Params ma1_from_moments(const UMoments& u);

double expected_sigma(double sigma2, double sum_omega2);
double expected_sigma(const SrSarvParams& sr);

// Delta-method diagnostics.
double sigma_autocov_delta(const SrSarvParams& sr, double h);
double sigma2_sigma_cov_delta(const SrSarvParams& sr, double h);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

Interval f_constraint_interval(double g0, double omega1, double sigma2, std::size_t m, double e_sigma);

double cross_cov_iv_u(const SrSarvParams& sr, double f_m, std::size_t m, std::size_t n);

}  // namespace mnrv
