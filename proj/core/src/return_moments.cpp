#include "mnrv/return_moments.hpp"

#include <cmath>

#include "mnrv/error.hpp"
#include "mnrv/numeric.hpp"

namespace mnrv {

ReturnAcov sample_autocov(std::span<const double> returns, std::size_t m, std::size_t max_lag) {
  require(m >= 1, "autocovariance: m must be >= 1");
  require(max_lag < m, "autocovariance: max_lag must be < m");
  require(!returns.empty() && returns.size() % m == 0, "autocovariance: returns must hold whole days");
  const std::size_t n = returns.size(), days = n / m;
  const double mu = mean(returns);

  ReturnAcov a;
  a.m = m;
  a.n_obs = n;
  a.g.assign(max_lag + 1, 0.0);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double s = pairwise_sum_of(days, [&](std::size_t d) {
      const double* r = returns.data() + d * m;
      return pairwise_sum_of(m - h, [&](std::size_t i) { return (r[i] - mu) * (r[i + h] - mu); });
    });
    a.g[h] = s / static_cast<double>(n);
  }
  a.degenerate = !(a.g[0] > 0.0);
  a.se.assign(max_lag + 1, a.g[0] / std::sqrt(static_cast<double>(n)));
  return a;
}

ReturnAcov sample_autocov(const IntradayPanel& panel, std::size_t max_lag, std::size_t m) {
  if (m == 0) m = panel.m;
  auto r = panel.pooled_returns(m, true);
  return sample_autocov(r, m, max_lag);
}

QSelection select_q(const ReturnAcov& acov, double level) {
  require(level > 0.0 && level < 1.0, "select_q: level must be in (0,1)");
  if (acov.degenerate) fail(ErrorKind::identification, "select_q: degenerate return sample (G_0 = 0)");
  QSelection s;
  s.critical = normal_quantile(1.0 - level / 2.0);
  const std::size_t L = acov.g.size() - 1;
  auto insignificant = [&](std::size_t k) { return std::abs(acov.g[k]) <= s.critical * acov.se[k]; };
  bool found = false;
  for (std::size_t k = 1; k + 2 <= L; ++k) {
    if (insignificant(k) && insignificant(k + 1) && insignificant(k + 2)) {
      s.run_start = k;
      s.q = k >= 2 ? k - 2 : 0;
      found = true;
      break;
    }
  }
  if (!found)
    fail(ErrorKind::identification,
         "select_q: no run of three insignificant lags up to lag " + std::to_string(L) + "; increase max_lag");

  const double n = static_cast<double>(acov.n_obs);
  double stat = 0.0;
  for (std::size_t k = 1; k <= L; ++k) {
    double rho = acov.g[k] / acov.g[0];
    stat += rho * rho / (n - static_cast<double>(k));
  }
  s.lb_lags = L;
  s.lb_stat = n * (n + 2.0) * stat;
  s.lb_pvalue = chi2_upper_pvalue(s.lb_stat, static_cast<double>(L));
  s.lb_reject = s.lb_pvalue < level;
  return s;
}

double sigma2_from_returns(std::span<const double> g, std::size_t m, std::size_t q) {
  require(g.size() >= q + 2, "sigma2: need autocovariances up to lag q+1");
  double s = g[0];
  for (std::size_t i = 1; i <= q + 1; ++i) s += 2.0 * g[i];
  double sigma2 = static_cast<double>(m) * s;
  if (!(sigma2 > 0.0))
    fail(ErrorKind::identification, "identification failure: implied sigma^2 is not positive");
  return sigma2;
}

double sigma2_from_returns(const ReturnAcov& acov, std::size_t q) {
  return sigma2_from_returns(acov.g, acov.m, q);
}

double expected_u_from_data(std::span<const double> ncrv, double sigma2) { return mean(ncrv) - sigma2; }

namespace {

std::vector<double> omega_recursion(std::span<const double> g, std::size_t q) {
  std::vector<double> w(q + 1, 0.0);
  for (std::size_t i = 1; i <= q; ++i) {
    double s = 0.0;
    for (std::size_t j = 1; j + i <= q + 1; ++j) s += static_cast<double>(j) * g[i + j];
    w[i] = -s;
  }
  return w;
}

}  // namespace

Omega0Forms omega0_forms(std::span<const double> g, std::size_t m, std::size_t q, double f_m, double e_sigma) {
  require(g.size() >= q + 2, "omega: need autocovariances up to lag q+1");
  auto w = omega_recursion(g, q);
  double w1 = q >= 1 ? w[1] : 0.0;
  double w2 = q >= 2 ? w[2] : 0.0;
  double fterm = f_m * (e_sigma + f_m) / static_cast<double>(m);
  Omega0Forms o;
  o.via_g1 = 2.0 * w1 - w2 - g[1] - fterm;
  double s = 0.0;
  for (std::size_t k = 1; k <= q + 1; ++k) s += static_cast<double>(k) * g[k];
  o.expanded = -s - fterm;
  return o;
}

NoiseAcov omega_from_g(std::span<const double> g, std::size_t m, std::size_t q, double f_m, double e_sigma) {
  NoiseAcov out;
  out.q = q;
  out.omega = omega_recursion(g, q);
  out.omega0_plus_delta = omega0_forms(g, m, q, f_m, e_sigma).via_g1;
  out.omega[0] = out.omega0_plus_delta;
  if (out.omega[0] < 0.0)
    fail(ErrorKind::constraint, "constraint (res_f)/(res_es) violated: implied Omega_0 < 0");
  return out;
}

NoiseAcov omega_from_g(const ReturnAcov& acov, std::size_t q, double f_m, double e_sigma) {
  return omega_from_g(acov.g, acov.m, q, f_m, e_sigma);
}

double omega0_weak_f(double g0, double sigma2, double omega1, std::size_t m, double f_m, double e_sigma) {
  double dm = static_cast<double>(m);
  return (dm * g0 - sigma2 + 2.0 * dm * omega1 - 2.0 * f_m * e_sigma - 2.0 * f_m * f_m) / (2.0 * dm);
}

std::vector<double> return_acov_theory(double sigma2, std::span<const double> omega, double sigma_delta2,
                                       double f_m, double e_sigma, std::size_t m) {
  require(!omega.empty(), "theory: omega must hold at least Omega_0");
  const std::size_t q = omega.size() - 1;
  auto W = [&](std::size_t k) { return k <= q ? omega[k] : 0.0; };
  const double dm = static_cast<double>(m);
  const double fterm = f_m * (e_sigma + f_m) / dm;
  std::vector<double> g(q + 3, 0.0);
  g[0] = sigma2 / dm + 2.0 * (W(0) - W(1) + sigma_delta2) + 2.0 * fterm;
  g[1] = 2.0 * W(1) - W(2) - W(0) - sigma_delta2 - fterm;
  for (std::size_t n = 2; n <= q + 2; ++n) g[n] = 2.0 * W(n) - W(n + 1) - W(n - 1);
  return g;
}

}  // namespace mnrv
