#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "mnrv/error.hpp"
#include "mnrv/market_sim.hpp"
#include "mnrv/numeric.hpp"
#include "mnrv/panel_io.hpp"
#include "mnrv/realized.hpp"

using namespace mnrv;

namespace {

SimOptions opts(std::size_t n_days, std::size_t m, std::size_t sub, std::uint64_t seed) {
  SimOptions o;
  o.n_days = n_days;
  o.m = m;
  o.sub_steps = sub;
  o.seed = seed;
  return o;
}

// Mean and batch-means standard error of x split into `batches` contiguous blocks.
std::pair<double, double> batch_mean(const std::vector<double>& x, std::size_t batches) {
  std::size_t len = x.size() / batches;
  std::vector<double> b(batches);
  for (std::size_t k = 0; k < batches; ++k)
    b[k] = std::accumulate(x.begin() + k * len, x.begin() + (k + 1) * len, 0.0) / static_cast<double>(len);
  double mu = mean(b);
  return {mu, std::sqrt(sample_variance(b) / static_cast<double>(batches))};
}

}  // namespace

TEST(SrSarvFromHeston, ReferenceConfigFactorParameters) {
  SrSarvParams sr = sr_sarv_from_heston(reference_heston());
  ASSERT_EQ(sr.p(), 1u);
  EXPECT_DOUBLE_EQ(sr.sigma2, 0.5);
  EXPECT_NEAR(sr.omega2[0], 0.7734, 5e-5);
  EXPECT_NEAR(sr.lambda[0], 0.0202, 5e-5);
}

TEST(SrSarvFromHeston, ZeroVolOfVolHasNoFactorLoading) {
  SrSarvParams sr = sr_sarv_from_heston({1.0, 1.0, 0.0, 0.0});
  EXPECT_EQ(sr.omega2[0], 0.0);
  EXPECT_EQ(sr.lambda[0], 1.0);
}

TEST(SrSarvFromHeston, LoadingEqualsSimulatedVarianceOfVariance) {
  HestonParams h{0.5, 2.0, 0.3, 0.0};
  SrSarvParams sr = sr_sarv_from_heston(h);
  EXPECT_NEAR(sr.omega2[0], 0.18, 1e-15);

  SimOptions o = opts(2000, 10, 50, 4242);  // 10^6 Euler steps
  o.store_sigma2_path = true;
  IntradayPanel p = simulate_panel(h, NoiseParams::none(), o);
  const auto& v = p.sigma2_path;
  double mu = mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mu) * (v[i] - mu);
  auto [var, se] = batch_mean(sq, 40);
  EXPECT_NEAR(var, sr.omega2[0], 3.0 * se) << "se=" << se;
}

TEST(TrueFOfM, Examples) {
  NoiseParams n;
  n.f_coef = 0.0;
  n.alpha = 0.3;
  EXPECT_EQ(true_f_of_m(n, 1440), 0.0);
  n.f_coef = 0.01;
  n.alpha = 0.6;
  EXPECT_NEAR(true_f_of_m(n, 1440), 0.01 * std::pow(1440.0, 0.2), 1e-15);
  EXPECT_NEAR(true_f_of_m(n, 1440), 0.04282, 5e-6);
  n.alpha = 1.0;
  EXPECT_DOUBLE_EQ(true_f_of_m(n, 100), 0.01);
}

TEST(NoiseParams, ReferenceReadsTheFiveValueTuple) {
  NoiseParams n = NoiseParams::reference();
  EXPECT_EQ(n.f_coef, 0.01);
  EXPECT_EQ(n.alpha, 0.6);
  ASSERT_EQ(n.q(), 1u);
  EXPECT_EQ(n.psi[0], 0.3);
  EXPECT_EQ(n.sigma_zeta, 0.01017046);
  EXPECT_EQ(n.sigma_delta, 1e-4);
  EXPECT_DOUBLE_EQ(n.omega_delta(), 3.0 * std::pow(1e-4, 4));
}

TEST(NoiseParams, RejectsSubJensenFourthMoment) {
  NoiseParams n = NoiseParams::reference();
  n.delta_kurtosis = 0.5;
  EXPECT_THROW(n.validate(), Error);
}

TEST(SimulatePanel, ConstantVolatilityGivesExactIv) {
  IntradayPanel p = simulate_panel({1.0, 0.5, 0.0, 0.0}, NoiseParams::none(), opts(5, 48, 30, 1));
  ASSERT_EQ(p.iv_true.size(), 5u);
  for (double iv : p.iv_true) EXPECT_NEAR(iv, 0.5, 1e-12);
  EXPECT_EQ(p.p_true, p.p_obs);
  EXPECT_EQ(p.p_obs.size(), 5u * 48 + 1);
}

TEST(SimulatePanel, SameSeedIsBitIdentical) {
  auto a = simulate_panel(reference_heston(), NoiseParams::reference(), opts(3, 288, 10, 77));
  auto b = simulate_panel(reference_heston(), NoiseParams::reference(), opts(3, 288, 10, 77));
  auto c = simulate_panel(reference_heston(), NoiseParams::reference(), opts(3, 288, 10, 78));
  EXPECT_EQ(a.p_obs, b.p_obs);
  EXPECT_EQ(a.p_true, b.p_true);
  EXPECT_EQ(a.iv_true, b.iv_true);
  EXPECT_NE(a.p_obs, c.p_obs);
}

TEST(SimulatePanel, RejectsOverflowAndBadLeverage) {
  SimOptions o = opts(1, std::numeric_limits<std::size_t>::max() / 2, 4, 1);
  EXPECT_THROW(simulate_panel(reference_heston(), NoiseParams::none(), o), Error);
  HestonParams h = reference_heston();
  h.rho = 1.5;
  EXPECT_THROW(simulate_panel(h, NoiseParams::none(), opts(1, 10, 1, 1)), Error);
}

TEST(SimulatePanel, NoiseVarianceMatchesGenerator) {
  NoiseParams n = NoiseParams::reference();
  const std::size_t m = 288;
  IntradayPanel p = simulate_panel(reference_heston(), n, opts(400, m, 2, 9));
  std::vector<double> eps2;
  for (std::size_t d = 0; d < p.n_days; ++d)
    for (double e : p.noise(d)) eps2.push_back(e * e);
  auto [v, se] = batch_mean(eps2, 50);
  EXPECT_NEAR(v, n.noise_variance(m), 3.0 * se) << "se=" << se;
  double expect = n.f_of_m(m) * n.f_of_m(m) / m + n.omega()[0] + n.sigma_delta2();
  EXPECT_NEAR(n.noise_variance(m), expect, 1e-18);
}

TEST(SimulatePanel, ReturnNoiseCovarianceIsContemporaneousOnly) {
  NoiseParams n;
  n.f_coef = 0.5;
  n.alpha = 1.0;
  n.sigma_delta = 0.01;
  const std::size_t m = 48;
  IntradayPanel p = simulate_panel({1.0, 0.5, 0.0, 0.0}, n, opts(4000, m, 4, 3));
  std::vector<double> same, next, prev;
  for (std::size_t k = 2; k + 1 < p.p_obs.size(); ++k) {
    double r = p.p_true[k] - p.p_true[k - 1];
    same.push_back(r * (p.p_obs[k] - p.p_true[k]));
    next.push_back(r * (p.p_obs[k + 1] - p.p_true[k + 1]));
    prev.push_back(r * (p.p_obs[k - 1] - p.p_true[k - 1]));
  }
  const double target = 0.5 * std::sqrt(0.5) / m;
  auto [c0, s0] = batch_mean(same, 50);
  auto [c1, s1] = batch_mean(next, 50);
  auto [c2, s2] = batch_mean(prev, 50);
  EXPECT_NEAR(c0, target, 3.0 * s0);
  EXPECT_NEAR(c1, 0.0, 3.0 * s1);
  EXPECT_NEAR(c2, 0.0, 3.0 * s2);
}

TEST(SimulatePanel, RealizedVarianceConvergesToIv) {
  IntradayPanel p = simulate_panel(reference_heston(), NoiseParams::none(), opts(300, 1440, 4, 21));
  auto coarse = compute_series(p, MeasureKind::RV, 144).values;
  auto fine = compute_series(p, MeasureKind::RV, 1440).values;
  double err_c = 0.0, err_f = 0.0, bias = 0.0;
  std::size_t within = 0;
  for (std::size_t d = 0; d < p.n_days; ++d) {
    err_c += std::abs(coarse[d] - p.iv_true[d]) / p.iv_true[d];
    err_f += std::abs(fine[d] - p.iv_true[d]) / p.iv_true[d];
    bias += fine[d] - p.iv_true[d];
    if (std::abs(fine[d] - p.iv_true[d]) <= 0.05 * p.iv_true[d]) ++within;
  }
  // Relative error scales like 1/sqrt(m): a tenfold finer grid cuts it by about sqrt(10).
  EXPECT_GT(err_c / err_f, 2.2);
  EXPECT_LT(err_c / err_f, 4.5);
  // Per-day relative error is about N(0, 2 IQ / (m IV^2)), so the expected share within 5% follows from the truth.
  double expected = 0.0;
  for (std::size_t d = 0; d < p.n_days; ++d) {
    double sd = std::sqrt(2.0 * p.iq_true[d] / 1440.0) / p.iv_true[d];
    expected += std::erf(0.05 / (sd * std::sqrt(2.0))) / p.n_days;
  }
  double share = static_cast<double>(within) / p.n_days;
  EXPECT_LT(expected, 0.83);
  EXPECT_NEAR(share, expected, 3.0 * std::sqrt(expected * (1 - expected) / p.n_days));
  std::vector<double> diff(p.n_days);
  for (std::size_t d = 0; d < p.n_days; ++d) diff[d] = fine[d] - p.iv_true[d];
  EXPECT_NEAR(bias / p.n_days, 0.0, 3.0 * std::sqrt(sample_variance(diff) / p.n_days));
}

TEST(PanelIo, SaveLoadRoundTripIsExact) {
  SimOptions o = opts(3, 48, 5, 5);
  o.store_sigma2_path = true;
  IntradayPanel p = simulate_panel(reference_heston(), NoiseParams::reference(), o);
  auto dir = std::filesystem::temp_directory_path() / "mnrv_test_panel_io";
  std::filesystem::create_directories(dir);
  save_panel(p, dir / "panel.csv");
  IntradayPanel q = load_panel(dir / "panel.csv");
  EXPECT_EQ(q.n_days, p.n_days);
  EXPECT_EQ(q.m, p.m);
  EXPECT_EQ(q.p_true, p.p_true);
  EXPECT_EQ(q.p_obs, p.p_obs);
  EXPECT_EQ(q.iv_true, p.iv_true);
  EXPECT_EQ(q.iq_true, p.iq_true);
  EXPECT_EQ(q.sigma2_path, p.sigma2_path);
  ASSERT_TRUE(q.generator.has_value());
  EXPECT_EQ(q.generator->seed, 5u);
  EXPECT_EQ(q.generator->noise.psi, p.generator->noise.psi);
  std::filesystem::remove_all(dir);
}
