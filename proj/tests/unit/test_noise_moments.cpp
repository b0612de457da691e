#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "mnrv/error.hpp"
#include "mnrv/market_sim.hpp"
#include "mnrv/noise_moments.hpp"
#include "mnrv/numeric.hpp"
#include "mnrv/realized.hpp"
#include "mnrv/return_moments.hpp"
#include "support/oracle.hpp"

using namespace mnrv;

namespace {

std::vector<std::string> g_warnings;
void collect(const std::string& w) { g_warnings.push_back(w); }

std::pair<double, double> batch_mean(const std::vector<double>& x, std::size_t batches) {
  std::size_t len = x.size() / batches;
  std::vector<double> b(batches, 0.0);
  for (std::size_t k = 0; k < batches; ++k)
    for (std::size_t i = k * len; i < (k + 1) * len; ++i) b[k] += x[i] / static_cast<double>(len);
  return {mean(b), std::sqrt(sample_variance(b) / static_cast<double>(batches))};
}

}  // namespace

TEST(C3Family, AgreesWithIsserlisOracle) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> psi;
    std::size_t q = rep % 4;
    for (std::size_t i = 0; i < q; ++i) psi.push_back(-0.7 + 1.4 * u(g));
    double sz = 1e-3 * (1 + 4 * u(g)), sd2 = std::pow(2e-3 * u(g), 2), e4 = (1 + 5 * u(g)) * sd2 * sd2;
    double f_m = rep % 3 == 0 ? 0.0 : 0.05 * u(g);
    std::size_t m = 10 + rep * 7;
    auto w = oracle::ma_acov(psi, sz);
    for (std::size_t n = 0; n <= q + 3; ++n) {
      double lib = c3_family(w, sd2, e4, f_m, m, n);
      double ref = oracle::sq_noise_cov(psi, sz, sd2, e4, f_m, static_cast<double>(m), n);
      EXPECT_NEAR(lib, ref, 1e-12 * std::abs(ref) + 1e-24) << "rep " << rep << " n " << n;
    }
  }
}

TEST(C3Family, MatchesSimulatedSquaredNoiseReturns) {
  const std::vector<double> psi{0.5, -0.2};
  const double sz = 1.0, sd = 0.6, f_m = 0.8, m = 4.0;
  std::mt19937_64 g(2);
  std::normal_distribution<double> z;
  // Laplace delta: kurtosis 6 with all moments finite.
  std::exponential_distribution<double> ex(1.0);
  std::bernoulli_distribution coin(0.5);
  const double b = sd / std::sqrt(2.0);
  const std::size_t T = 2'000'000, L = 4;
  std::vector<double> zeta(T + 3), eps(T + 1);
  for (double& x : zeta) x = sz * z(g);
  for (std::size_t t = 0; t <= T; ++t) {
    double d = b * ex(g) * (coin(g) ? 1.0 : -1.0);
    eps[t] = zeta[t + 2] + psi[0] * zeta[t + 1] + psi[1] * zeta[t] + d + f_m * z(g) / std::sqrt(m);
  }
  std::vector<double> e2(T);
  for (std::size_t t = 0; t < T; ++t) e2[t] = std::pow(eps[t + 1] - eps[t], 2);
  const double mu = mean(e2);
  auto w = oracle::ma_acov(psi, sz);
  for (std::size_t n = 0; n <= L; ++n) {
    std::vector<double> prod(T - L);
    for (std::size_t t = 0; t + L < T; ++t) prod[t] = (e2[t] - mu) * (e2[t + n] - mu);
    auto [c, se] = batch_mean(prod, 100);
    double th = c3_family(w, sd * sd, 6.0 * std::pow(sd, 4), f_m, static_cast<std::size_t>(m), n);
    EXPECT_NEAR(c, th, 4.0 * se + 1e-3 * std::abs(th)) << "lag " << n;
  }
}

TEST(GammaN, IsTwiceSquaredReturnAcov) {
  std::vector<double> w{3.0, 1.0, 0.5};
  EXPECT_DOUBLE_EQ(gamma_n(w, 1), 2.0 * std::pow(2.0 * 1.0 - 3.0 - 0.5, 2));
  EXPECT_DOUBLE_EQ(gamma_n(w, 3), 2.0 * 0.25);
  EXPECT_EQ(gamma_n(w, 4), 0.0);
  EXPECT_THROW(gamma_n(w, 0), Error);
}

TEST(UMoments, ExactF0MatchesBruteForcePairSums) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t ms[] = {1, 2, 3, 5, 26};
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> psi;
    std::size_t q = rep % 4;
    for (std::size_t i = 0; i < q; ++i) psi.push_back(-0.7 + 1.4 * u(g));
    double sz = 1e-2 * (1 + u(g)), sd2 = std::pow(5e-3 * u(g), 2), e4 = (1 + 4 * u(g)) * sd2 * sd2;
    double s2 = 0.2 + u(g);
    std::size_t m = ms[rep % 5];
    UMomentInputs in;
    in.sigma2 = s2;
    in.omega = oracle::ma_acov(psi, sz);
    in.sigma_delta2 = sd2;
    in.omega_delta = e4;
    in.m = m;
    auto lib = u_moments(in, UMode::exact_f0);
    auto ref = oracle::u_moments_bruteforce(s2, psi, sz, sd2, e4, m);
    auto rel = [](double a) { return 1e-11 * std::abs(a) + 1e-20; };
    EXPECT_NEAR(lib.mean, ref.mean, rel(ref.mean));
    EXPECT_NEAR(lib.variance, ref.variance, rel(ref.variance));
    EXPECT_NEAR(lib.lag1, ref.lag1, rel(ref.lag1));
    double l2 = lib.higher.size() > 0 ? lib.higher[0] : 0.0, l3 = lib.higher.size() > 1 ? lib.higher[1] : 0.0;
    EXPECT_NEAR(l2, ref.lag2, rel(ref.lag2)) << "m " << m << " q " << q;
    EXPECT_NEAR(l3, ref.lag3, rel(ref.lag3));
  }
}

TEST(UMoments, ExactModeRejectsNonzeroF) {
  UMomentInputs in;
  in.sigma2 = 0.5;
  in.omega = {1e-4};
  in.f_m = 0.01;
  EXPECT_THROW(u_moments(in, UMode::exact_f0), Error);
  EXPECT_NO_THROW(u_moments(in, UMode::weak_f));
}

TEST(UMoments, WeakFReducesToExactAtZeroF) {
  UMomentInputs in;
  in.sigma2 = 0.5;
  in.omega = oracle::ma_acov({0.3}, 0.01);
  in.sigma_delta2 = 1e-8;
  in.omega_delta = 3e-16;
  in.e_sigma = 0.6;
  in.m = 288;
  auto a = u_moments(in, UMode::exact_f0), b = u_moments(in, UMode::weak_f);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_EQ(a.lag1, b.lag1);
  EXPECT_EQ(a.higher, b.higher);
}

TEST(UMoments, MeanIsExactForAnyF) {
  const double s2 = 0.5, f = 0.03, es = 0.7;
  UMomentInputs in;
  in.sigma2 = s2;
  in.omega = oracle::ma_acov({0.3, 0.1}, 0.01);
  in.sigma_delta2 = 4e-8;
  in.omega_delta = 3 * 16e-16;
  in.f_m = f;
  in.e_sigma = es;
  in.m = 144;
  auto u = u_moments(in, UMode::weak_f);
  double Ee2 = oracle::gaussian_return_acov({0.3, 0.1}, 0.01, f, 144.0, 0) + 2 * in.sigma_delta2;
  EXPECT_NEAR(u.mean, 144 * Ee2 + 2 * f * es, 1e-15);
}

TEST(UMoments, SimulatedConstantVolatilityPanel) {
  // The noise-induced part is NCRV minus RV on the true prices; the discretization error of RV is not part of u.
  HestonParams h{0.02, 0.5, 0.0, 0.0};
  NoiseParams n = NoiseParams::reference();
  n.f_coef = 0.0;
  n.sigma_delta = 4e-3;
  n.delta_kurtosis = 4.0;
  SimOptions o;
  o.n_days = 30000;
  o.m = 48;
  o.sub_steps = 1;
  o.seed = 4;
  auto p = simulate_panel(h, n, o);
  auto ncrv = compute_series(p, MeasureKind::NCRV, 48).values;
  auto rv = compute_series(p, MeasureKind::RV, 48).values;
  std::vector<double> u(rv.size());
  for (std::size_t d = 0; d < u.size(); ++d) u[d] = ncrv[d] - rv[d];
  auto th = u_moments_dependent(sr_sarv_from_heston(h), n, 48, UMode::exact_f0);

  auto [mu, se_mu] = batch_mean(u, 100);
  EXPECT_NEAR(mu, th.mean, 4 * se_mu);
  const double c = mean(u);
  std::vector<double> sq(u.size()), l1(u.size() - 1);
  for (std::size_t d = 0; d < u.size(); ++d) sq[d] = (u[d] - c) * (u[d] - c);
  for (std::size_t d = 0; d + 1 < u.size(); ++d) l1[d] = (u[d] - c) * (u[d + 1] - c);
  auto [v, se_v] = batch_mean(sq, 100);
  auto [c1, se_c1] = batch_mean(l1, 100);
  EXPECT_NEAR(v, th.variance, 4 * se_v);
  EXPECT_NEAR(c1, th.lag1, 4 * se_c1);
}

TEST(UMoments, SimulatedWeakFPanel) {
  HestonParams h{0.02, 0.5, 0.0, 0.0};
  NoiseParams n = NoiseParams::reference();
  n.f_coef = 0.05;
  n.alpha = 1.0;
  const std::size_t m = 48;
  SimOptions o;
  o.n_days = 30000;
  o.m = m;
  o.sub_steps = 1;
  o.seed = 5;
  auto p = simulate_panel(h, n, o);
  auto ncrv = compute_series(p, MeasureKind::NCRV, m).values;
  auto rv = compute_series(p, MeasureKind::RV, m).values;
  std::vector<double> u(rv.size()), e2(rv.size(), 0.0);
  for (std::size_t d = 0; d < u.size(); ++d) {
    u[d] = ncrv[d] - rv[d];
    auto eps = p.noise(d);
    double prev = d == 0 ? p.p_obs[0] - p.p_true[0] : p.noise(d - 1).back();
    for (double x : eps) {
      e2[d] += (x - prev) * (x - prev);
      prev = x;
    }
  }
  UMomentInputs in;
  in.sigma2 = 0.5;
  in.omega = n.omega();
  in.sigma_delta2 = n.sigma_delta2();
  in.omega_delta = n.omega_delta();
  in.f_m = n.f_of_m(m);
  in.e_sigma = std::sqrt(0.5);
  in.m = m;
  auto th = u_moments(in, UMode::weak_f);
  auto [mu, se_mu] = batch_mean(u, 100);
  EXPECT_NEAR(mu, th.mean, 4 * se_mu);

  // The squared noise returns carry the C3 family: Var = sum over j of (m - |j|) C_|j|.
  double c3 = 0.0;
  for (long j = -static_cast<long>(n.q() + 1); j <= static_cast<long>(n.q() + 1); ++j)
    c3 += static_cast<double>(static_cast<long>(m) - std::labs(j)) *
          c3_family(in.omega, in.sigma_delta2, in.omega_delta, in.f_m, m, static_cast<std::size_t>(std::labs(j)));
  const double ce = mean(e2);
  std::vector<double> sq_e(e2.size()), sq_u(u.size());
  const double cu = mean(u);
  for (std::size_t d = 0; d < e2.size(); ++d) {
    sq_e[d] = (e2[d] - ce) * (e2[d] - ce);
    sq_u[d] = (u[d] - cu) * (u[d] - cu);
  }
  auto [ve, se_ve] = batch_mean(sq_e, 100);
  EXPECT_NEAR(ve, c3, 4 * se_ve);

  // The weak-f variance drops terms of order f^2 sigma^2 / m and so understates Var[u] here.
  auto [vu, se_vu] = batch_mean(sq_u, 100);
  EXPECT_GT(vu - 4 * se_vu, th.variance);
}

TEST(NwMoments, AgreeWithExactFormulasForIidNoise) {
  const double s2 = 0.4;
  for (std::size_t m : {1u, 12u, 288u}) {
    // Gaussian IID noise: Var[eps^2] = 2 sigma_eps^4.
    const double se2 = 3e-6;
    auto nw = nw_u_moments(s2, se2, 2 * se2 * se2, static_cast<double>(m));
    UMomentInputs in;
    in.sigma2 = s2;
    in.omega = {se2};
    in.m = m;
    auto ex = u_moments(in, UMode::exact_f0);
    EXPECT_NEAR(nw.u.mean, ex.mean, 1e-18);
    EXPECT_NEAR(nw.u.variance, ex.variance, 1e-12 * ex.variance);
    EXPECT_NEAR(nw.u.lag1, ex.lag1, 1e-12 * ex.lag1);

    // Non-Gaussian IID noise through the delta component.
    const double k = 5.0;
    auto nw2 = nw_u_moments(s2, se2, (k - 1) * se2 * se2, static_cast<double>(m));
    UMomentInputs in2;
    in2.sigma2 = s2;
    in2.omega = {0.0};
    in2.sigma_delta2 = se2;
    in2.omega_delta = k * se2 * se2;
    in2.m = m;
    auto ex2 = u_moments(in2, UMode::exact_f0);
    EXPECT_NEAR(nw2.u.variance, ex2.variance, 1e-12 * ex2.variance);
    EXPECT_NEAR(nw2.u.lag1, ex2.lag1, 1e-12 * ex2.lag1);
  }
  EXPECT_THROW(nw_u_moments(s2, 1e-6, 0.0, 10), Error);
}

TEST(Ma1FromMoments, InvertibleRepresentation) {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(-0.49, 0.49);
  for (int rep = 0; rep < 200; ++rep) {
    UMoments m;
    m.mean = 1.0;
    m.variance = 2.0;
    m.lag1 = 2.0 * u(g);
    auto p = ma1_from_moments(m);
    EXPECT_LT(std::abs(p.theta_u), 1.0);
    EXPECT_NEAR((1 + p.theta_u * p.theta_u) * p.sigma_xi2, m.variance, 1e-12);
    EXPECT_NEAR(p.theta_u * p.sigma_xi2, m.lag1, 1e-12);
    EXPECT_EQ(p.c_u, 1.0);
  }
  UMoments zero{0.0, 1.5, 0.0, {}};
  auto p0 = ma1_from_moments(zero);
  EXPECT_EQ(p0.theta_u, 0.0);
  EXPECT_EQ(p0.sigma_xi2, 1.5);
  UMoments bad{0.0, 1.0, 0.6, {}};
  EXPECT_THROW(ma1_from_moments(bad), Error);
  UMoments tiny{0.0, 1.0, 1e-14, {}};
  EXPECT_NEAR(ma1_from_moments(tiny).theta_u, 1e-14, 1e-28);
}

TEST(ExpectedSigma, DeltaApproximation) {
  EXPECT_DOUBLE_EQ(expected_sigma(0.25, 0.0), 0.5);
  EXPECT_NEAR(expected_sigma(0.25, 0.01), 0.5 - 0.01 / (8 * 0.125), 1e-15);
  g_warnings.clear();
  set_warning_handler(collect);
  expected_sigma(0.25, 2.0);
  set_warning_handler(nullptr);
  EXPECT_EQ(g_warnings.size(), 1u);
  EXPECT_THROW(expected_sigma(0.0, 0.0), Error);
}

TEST(ExpectedSigma, CloseToGammaLawForModerateVolOfVol) {
  HestonParams h{0.05, 0.5, 0.05, 0.0};
  double scale = h.gamma * h.gamma / (2 * h.kappa), shape = h.sigma2 / scale;
  double exact = std::sqrt(scale) * std::exp(std::lgamma(shape + 0.5) - std::lgamma(shape));
  EXPECT_NEAR(expected_sigma(sr_sarv_from_heston(h)), exact, 1e-4);
}

TEST(DeltaDiagnostics, ClosedForms) {
  SrSarvParams sr;
  sr.sigma2 = 0.5;
  sr.omega2 = {0.3, 0.1};
  sr.lambda = {0.02, 0.5};
  double h = 3.0;
  double a = 0.3 * std::exp(-0.06) + 0.1 * std::exp(-1.5);
  EXPECT_NEAR(sigma_autocov_delta(sr, h), a / 2.0 - 0.4 / 32.0, 1e-15);
  EXPECT_NEAR(sigma2_sigma_cov_delta(sr, h), a / std::sqrt(0.5), 1e-15);
  EXPECT_GT(sigma_autocov_delta(sr, 0.0), sigma_autocov_delta(sr, 10.0));
}

TEST(FConstraint, IntervalMatchesNonNegativeOmega0) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int inside = 0;
  for (int rep = 0; rep < 500; ++rep) {
    std::size_t m = 288;
    double s2 = 0.5, es = 0.65, w1 = 3e-5 * u(g);
    double f = -0.1 + 0.2 * u(g);
    std::vector<double> w{1e-4 + 1e-4 * u(g), w1};
    auto G = return_acov_theory(s2, w, 0.0, 0.05 * (u(g) - 0.5), es, m);
    Interval iv;
    try {
      iv = f_constraint_interval(G[0], w1, s2, m, es);
    } catch (const Error&) {
      continue;
    }
    double w0 = omega0_weak_f(G[0], s2, w1, m, f, es);
    EXPECT_EQ(iv.contains(f), w0 >= -1e-15) << f << " " << w0;
    inside += iv.contains(f);
    EXPECT_NEAR(iv.lo + iv.hi, -es, 1e-14);
  }
  EXPECT_GT(inside, 0);
  EXPECT_THROW(f_constraint_interval(0.0, 0.0, 10.0, 10, 0.1), Error);
}

TEST(CrossCov, ZeroForZeroFAndGeometricDecay) {
  SrSarvParams sr = sr_sarv_from_heston(reference_heston());
  EXPECT_EQ(cross_cov_iv_u(sr, 0.0, 288, 1), 0.0);
  double c1 = cross_cov_iv_u(sr, 0.04, 288, 1), c2 = cross_cov_iv_u(sr, 0.04, 288, 2);
  EXPECT_NEAR(c2 / c1, std::exp(-sr.lambda[0]), 1e-14);
  EXPECT_NEAR(cross_cov_iv_u(sr, 0.08, 288, 1) / c1, 2.0, 1e-14);
}
