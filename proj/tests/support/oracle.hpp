#pragma once

// Reference computations used as test oracles. They follow a different route
// from the library code (explicit coefficient sequences, brute-force sums, dense
// matrices, quadrature) so that agreement is informative.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mnrv/state_space.hpp"

namespace oracle {

// Coefficients of the Gaussian part of the noise return e_t = eps_t - eps_{t-1}
// on the MA innovations zeta: c_k = psi_k - psi_{k-1}, psi_0 = 1.
inline std::vector<double> zeta_return_coefs(const std::vector<double>& psi) {
  std::vector<double> full{1.0};
  full.insert(full.end(), psi.begin(), psi.end());
  std::vector<double> c(full.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    double cur = k < full.size() ? full[k] : 0.0;
    double prev = k >= 1 ? full[k - 1] : 0.0;
    c[k] = cur - prev;
  }
  return c;
}

// Autocovariance at lag n of the Gaussian part of e_t (MA part plus the return-correlated part).
inline double gaussian_return_acov(const std::vector<double>& psi, double sigma_zeta, double f_m, double m,
                                   std::size_t n) {
  auto c = zeta_return_coefs(psi);
  double s = 0.0;
  for (std::size_t k = 0; k + n < c.size(); ++k) s += c[k] * c[k + n];
  s *= sigma_zeta * sigma_zeta;
  double z = f_m * f_m / m;
  if (n == 0) s += 2.0 * z;
  if (n == 1) s -= z;
  return s;
}

// Autocovariance of the IID part delta_t - delta_{t-1}.
inline double delta_return_acov(double sd2, std::size_t n) { return n == 0 ? 2.0 * sd2 : n == 1 ? -sd2 : 0.0; }

// Cov[e_t^2, e_{t+n}^2] by Isserlis on the Gaussian part and direct expansion of the
// delta part (E[delta^4] = e4).
inline double sq_noise_cov(const std::vector<double>& psi, double sigma_zeta, double sd2, double e4, double f_m,
                           double m, std::size_t n) {
  double a = gaussian_return_acov(psi, sigma_zeta, f_m, m, n);
  double b = delta_return_acov(sd2, n);
  double dd = 0.0;
  if (n == 0) dd = 2.0 * e4 + 6.0 * sd2 * sd2 - 4.0 * sd2 * sd2;
  if (n == 1) dd = e4 + 3.0 * sd2 * sd2 - 4.0 * sd2 * sd2;
  return 2.0 * a * a + 4.0 * a * b + dd;
}

// Omega_k of the MA(q) noise.
inline std::vector<double> ma_acov(const std::vector<double>& psi, double sigma_zeta) {
  std::vector<double> full{1.0};
  full.insert(full.end(), psi.begin(), psi.end());
  std::vector<double> w(full.size(), 0.0);
  for (std::size_t k = 0; k < full.size(); ++k)
    for (std::size_t i = 0; i + k < full.size(); ++i) w[k] += full[i] * full[i + k];
  for (double& x : w) x *= sigma_zeta * sigma_zeta;
  return w;
}

struct UMom {
  double mean, variance, lag1, lag2, lag3;
};

// Moments of the daily noise bias u with constant variance sigma2 and f(m) = 0, by
// summing covariances over every pair of intraday indices.
inline UMom u_moments_bruteforce(double sigma2, const std::vector<double>& psi, double sigma_zeta, double sd2,
                                 double e4, std::size_t m) {
  const double dm = static_cast<double>(m);
  auto C = [&](long d) { return sq_noise_cov(psi, sigma_zeta, sd2, e4, 0.0, dm, static_cast<std::size_t>(std::labs(d))); };
  double Ee2 = gaussian_return_acov(psi, sigma_zeta, 0.0, dm, 0) + delta_return_acov(sd2, 0);
  auto cov_days = [&](long lag) {
    double s = 0.0;
    for (long i = 0; i < static_cast<long>(m); ++i)
      for (long j = 0; j < static_cast<long>(m); ++j) s += C(j + lag * static_cast<long>(m) - i);
    return s;
  };
  UMom u;
  u.mean = dm * Ee2;
  u.variance = cov_days(0) + 4.0 * dm * (sigma2 / dm) * Ee2;
  u.lag1 = cov_days(1);
  u.lag2 = cov_days(2);
  u.lag3 = cov_days(3);
  return u;
}

// Dense Gaussian log-density of y_1..y_T under the state-space model, with the
// state started from N(a1, P1). Covariances are propagated explicitly.
inline double dense_loglik(const mnrv::SsmSpec& s, const std::vector<double>& y, const Eigen::VectorXd& a1,
                           const Eigen::MatrixXd& P1) {
  const std::size_t T = y.size();
  std::vector<Eigen::VectorXd> mean(T);
  std::vector<Eigen::MatrixXd> var(T);
  mean[0] = a1;
  var[0] = P1;
  for (std::size_t t = 1; t < T; ++t) {
    mean[t] = s.state_intercept + s.transition * mean[t - 1];
    var[t] = s.transition * var[t - 1] * s.transition.transpose() + s.state_cov;
  }
  Eigen::MatrixXd S(T, T);
  Eigen::VectorXd mu(T), dev(T);
  for (std::size_t t = 0; t < T; ++t) {
    mu(t) = s.obs_intercept + (s.loading * mean[t])(0);
    Eigen::MatrixXd cross = var[t];  // Cov[a_u, a_t] for u = t, t+1, ...
    for (std::size_t u = t; u < T; ++u) {
      double c = (s.loading * cross * s.loading.transpose())(0, 0);
      S(t, u) = S(u, t) = c;
      cross = s.transition * cross;
    }
    S(t, t) += s.obs_var;
    dev(t) = y[t] - mu(t);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  Eigen::VectorXd z = llt.matrixL().solve(dev);
  double logdet = 0.0;
  for (std::size_t t = 0; t < T; ++t) logdet += 2.0 * std::log(llt.matrixL()(t, t));
  return -0.5 * (static_cast<double>(T) * std::log(2.0 * M_PI) + logdet + z.squaredNorm());
}

// Stationary covariance by summing T^k Q T^k' until the terms vanish.
inline Eigen::MatrixXd lyapunov_series(const Eigen::MatrixXd& T, const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd P = Q, term = Q;
  for (int k = 0; k < 20000; ++k) {
    term = T * term * T.transpose();
    P += term;
    if (term.norm() < 1e-18 * P.norm()) break;
  }
  return P;
}

// ARMA autocovariances from truncated MA(infinity) weights.
inline std::vector<double> arma_acov_psi(const std::vector<double>& phi, const std::vector<double>& theta,
                                         double s2, std::size_t max_lag, std::size_t terms = 20000) {
  std::vector<double> psi(terms, 0.0);
  for (std::size_t j = 0; j < terms; ++j) {
    double v = j == 0 ? 1.0 : (j - 1 < theta.size() ? theta[j - 1] : 0.0);
    for (std::size_t i = 0; i < phi.size() && i < j; ++i) v += phi[i] * psi[j - 1 - i];
    psi[j] = v;
  }
  std::vector<double> g(max_lag + 1, 0.0);
  for (std::size_t h = 0; h <= max_lag; ++h)
    for (std::size_t j = 0; j + h < terms; ++j) g[h] += psi[j] * psi[j + h];
  for (double& x : g) x *= s2;
  return g;
}

// Cov[IV_t, IV_{t+n}] for Cov[sigma2(s), sigma2(u)] = sum_i w_i exp(-l_i |s-u|),
// by Gauss-Legendre quadrature on both unit intervals.
inline double iv_autocov_quadrature(const std::vector<double>& w, const std::vector<double>& l, std::size_t n) {
  static const double x[] = {-0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
                             -0.1488743389816312, 0.1488743389816312,  0.4333953941292472,  0.6794095682990244,
                             0.8650633666889845,  0.9739065285171717};
  static const double wt[] = {0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963,
                              0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                              0.1494513491505806, 0.0666713443086881};
  // Composite rule on panels; the kernel has a kink on the diagonal when n = 0.
  const int panels = 64;
  double total = 0.0;
  for (int a = 0; a < panels; ++a)
    for (int b = 0; b < panels; ++b)
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
          double s = (a + 0.5 + 0.5 * x[i]) / panels;
          double u = static_cast<double>(n) + (b + 0.5 + 0.5 * x[j]) / panels;
          double k = 0.0;
          for (std::size_t r = 0; r < w.size(); ++r) k += w[r] * std::exp(-l[r] * std::abs(s - u));
          total += wt[i] * wt[j] * 0.25 / (panels * panels) * k;
        }
  return total;
}

}  // namespace oracle
