#include "mnrv/noise_moments.hpp"

#include <cmath>

#include "mnrv/error.hpp"
#include "mnrv/return_moments.hpp"

namespace mnrv {

namespace {

double omega_at(std::span<const double> w, long k) {
  if (k < 0) k = -k;
  return static_cast<std::size_t>(k) < w.size() ? w[static_cast<std::size_t>(k)] : 0.0;
}

// Autocovariance of the Gaussian part of the noise return at lag n.
double a_coef(std::span<const double> w, double f2m, std::size_t n) {
  long k = static_cast<long>(n);
  double a = 2.0 * omega_at(w, k) - omega_at(w, k - 1) - omega_at(w, k + 1);
  if (n == 0) a = 2.0 * (omega_at(w, 0) - omega_at(w, 1));
  if (n == 0) a += 2.0 * f2m;
  if (n == 1) a -= f2m;
  return a;
}

// Cov[u_t, u_{t+n}] contribution of the squared noise returns:
// sum over j of (m - |j - m n|)^+ C_j, C supported on 0..q+1.
double c3_sum(const UMomentInputs& in, std::size_t n) {
  const std::size_t q = in.omega.size() - 1;
  const long M = static_cast<long>(in.m), center = M * static_cast<long>(n);
  double s = 0.0;
  for (long j = -static_cast<long>(q + 1); j <= static_cast<long>(q + 1); ++j) {
    long w = M - std::labs(j - center);
    if (w <= 0) continue;
    s += static_cast<double>(w) *
         c3_family(in.omega, in.sigma_delta2, in.omega_delta, in.f_m, in.m, static_cast<std::size_t>(std::labs(j)));
  }
  return s;
}

}  // namespace

NwMoments nw_u_moments(double sigma2, double sigma_eps2, double omega_eps2, double m) {
  if (!(omega_eps2 > 0.0)) fail(ErrorKind::invalid_argument, "nw moments: omega_eps2 must be > 0");
  require(m >= 1.0 && sigma_eps2 >= 0.0, "nw moments: need m >= 1 and sigma_eps2 >= 0");
  NwMoments out;
  out.u.mean = 2.0 * m * sigma_eps2;
  out.u.variance =
      8.0 * sigma2 * sigma_eps2 + 2.0 * (2.0 * m - 1.0) * omega_eps2 + 4.0 * m * sigma_eps2 * sigma_eps2;
  out.u.lag1 = omega_eps2;
  out.u.higher = {0.0};
  out.A = 4.0 * sigma2 * sigma_eps2 / omega_eps2 + 2.0 * m - 1.0 + 2.0 * m * sigma_eps2 * sigma_eps2 / omega_eps2;
  out.ma1.c_u = out.u.mean;
  out.ma1.theta_u = 1.0 / (out.A + std::sqrt(out.A * out.A - 1.0));
  out.ma1.sigma_xi2 = omega_eps2 / out.ma1.theta_u;
  return out;
}

double gamma_n(std::span<const double> omega, std::size_t n) {
  require(n >= 1, "gamma_n: n must be >= 1");
  long k = static_cast<long>(n);
  double a = 2.0 * omega_at(omega, k) - omega_at(omega, k - 1) - omega_at(omega, k + 1);
  return 2.0 * a * a;
}

double c3_family(std::span<const double> omega, double sigma_delta2, double omega_delta, double f_m,
                 std::size_t m, std::size_t n) {
  require(!omega.empty(), "c3: omega must hold at least Omega_0");
  require(m >= 1, "c3: m must be >= 1");
  const std::size_t q = omega.size() - 1;
  const double f2m = f_m * f_m / static_cast<double>(m);
  const double s4 = sigma_delta2 * sigma_delta2;
  if (n >= q + 2 && n >= 2) return 0.0;
  double a = a_coef(omega, f2m, n);
  switch (n) {
    case 0: {
      double b = 2.0 * sigma_delta2;
      return 2.0 * a * a + 4.0 * a * b + 2.0 * omega_delta + 2.0 * s4;
    }
    case 1: {
      double b = -sigma_delta2;
      return 2.0 * a * a + 4.0 * a * b + omega_delta - s4;
    }
    default: return 2.0 * a * a;
  }
}

UMoments u_moments(const UMomentInputs& in, UMode mode) {
  require(!in.omega.empty(), "u moments: omega must hold at least Omega_0");
  require(in.m >= 1, "u moments: m must be >= 1");
  if (mode == UMode::exact_f0 && in.f_m != 0.0)
    fail(ErrorKind::invalid_argument, "u moments: exact-f0 mode requires f(m) = 0");
  const double m = static_cast<double>(in.m);
  const double D = in.omega[0] - omega_at(in.omega, 1) + in.sigma_delta2;
  const double f = in.f_m, es = in.e_sigma;

  UMoments u;
  u.mean = 2.0 * m * D + 2.0 * f * f + 2.0 * f * es;
  u.variance = 8.0 * (in.sigma2 + f * es) * D - 4.0 * (3.0 * m - 1.0) * f * f * f * es / (m * m) + c3_sum(in, 0);
  u.lag1 = -4.0 * f / (m * m) * es * (f * f + m * D) + c3_sum(in, 1);
  const std::size_t q = in.omega.size() - 1;
  const std::size_t last = (q + 1 + in.m - 1) / in.m + 1;
  for (std::size_t n = 2; n <= std::max<std::size_t>(last, 2); ++n) u.higher.push_back(c3_sum(in, n));
  return u;
}

UMoments u_moments_dependent(const SrSarvParams& sr, const NoiseParams& noise, std::size_t m, UMode mode) {
  sr.validate();
  noise.validate();
  UMomentInputs in;
  in.sigma2 = sr.sigma2;
  in.omega = noise.omega();
  in.sigma_delta2 = noise.sigma_delta2();
  in.omega_delta = noise.omega_delta();
  in.f_m = noise.f_of_m(static_cast<double>(m));
  in.e_sigma = expected_sigma(sr);
  in.m = m;
  if (mode == UMode::weak_f && in.f_m != 0.0) {
    auto g = return_acov_theory(in.sigma2, in.omega, in.sigma_delta2, in.f_m, in.e_sigma, m);
    auto iv = f_constraint_interval(g[0], omega_at(in.omega, 1), in.sigma2, m, in.e_sigma);
    if (!iv.contains(in.f_m)) fail(ErrorKind::constraint, "u moments: f(m) violates constraint (res_f)");
  }
  return u_moments(in, mode);
}

Ma1Params ma1_from_moments(const UMoments& u) {
  const double v = u.variance, c = u.lag1;
  if (!(v > 0.0)) fail(ErrorKind::numerical, "ma1: Var[u] must be > 0");
  Ma1Params p;
  p.c_u = u.mean;
  if (c == 0.0) {
    p.sigma_xi2 = v;
    return p;
  }
  double disc = v * v - 4.0 * c * c;
  if (disc < 0.0) fail(ErrorKind::numerical, "ma1: moments are not MA(1)-representable (v^2 < 4c^2)");
  // Invertible root; written to avoid cancellation when c is small.
  p.theta_u = 2.0 * c / (v + std::sqrt(disc));
  p.sigma_xi2 = c / p.theta_u;
  return p;
}

double expected_sigma(double sigma2, double sum_omega2) {
  require(sigma2 > 0.0, "expected sigma: sigma2 must be > 0");
  double s = std::sqrt(sigma2);
  double e = s - sum_omega2 / (8.0 * s * sigma2);
  if (e <= 0.0) warn("expected sigma: delta approximation is non-positive, outside its regime");
  return e;
}

double expected_sigma(const SrSarvParams& sr) { return expected_sigma(sr.sigma2, sr.sum_omega2()); }

double sigma_autocov_delta(const SrSarvParams& sr, double h) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < sr.p(); ++i) {
    a += sr.omega2[i] * std::exp(-sr.lambda[i] * h);
    b += sr.omega2[i];
  }
  return a / (4.0 * sr.sigma2) - b / (64.0 * sr.sigma2);
}

double sigma2_sigma_cov_delta(const SrSarvParams& sr, double h) {
  double a = 0.0;
  for (std::size_t i = 0; i < sr.p(); ++i) a += sr.omega2[i] * std::exp(-sr.lambda[i] * h);
  return a / std::sqrt(sr.sigma2);
}

Interval f_constraint_interval(double g0, double omega1, double sigma2, std::size_t m, double e_sigma) {
  const double dm = static_cast<double>(m);
  const double A = -2.0 * dm * g0 - 4.0 * dm * omega1 + 2.0 * sigma2;
  const double disc = e_sigma * e_sigma - A;
  if (disc < 0.0) fail(ErrorKind::constraint, "weak-f infeasible on this data: E[sigma]^2 < A");
  const double r = std::sqrt(disc);
  return {(-e_sigma - r) / 2.0, (-e_sigma + r) / 2.0};
}

double cross_cov_iv_u(const SrSarvParams& sr, double f_m, std::size_t m, std::size_t n) {
  if (f_m == 0.0) return 0.0;
  const double dm = static_cast<double>(m);
  const double sigma = std::sqrt(sr.sigma2);
  double s = 0.0;
  for (std::size_t k = 0; k < sr.p(); ++k) {
    const double l = sr.lambda[k];
    const double bracket = 1.0 + 2.0 / dm * std::cosh(l * (1.0 + 1.0 / dm)) - 2.0 * std::cosh(2.0 * l / dm) +
                           2.0 * (1.0 - 1.0 / dm) * std::cosh(2.0 * l / dm);
    s += sr.omega2[k] * std::exp(-l * static_cast<double>(n)) * bracket;
  }
  return f_m / (sigma * dm) * s;
}

}  // namespace mnrv
