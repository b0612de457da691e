#include "mnrv/market_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "mnrv/error.hpp"

namespace mnrv {

void HestonParams::validate() const {
  require(kappa > 0.0, "heston: kappa must be > 0");
  require(sigma2 > 0.0, "heston: sigma2 must be > 0");
  require(gamma >= 0.0, "heston: gamma must be >= 0");
  require(rho >= -1.0 && rho <= 1.0, "heston: rho must lie in [-1, 1]");
}

double SrSarvParams::sum_omega2() const {
  double s = 0.0;
  for (double w : omega2) s += w;
  return s;
}

void SrSarvParams::validate() const {
  require(p() >= 1, "sr-sarv: need at least one factor");
  require(omega2.size() == lambda.size(), "sr-sarv: omega2 and lambda differ in length");
  require(sigma2 > 0.0, "sr-sarv: sigma2 must be > 0");
  for (std::size_t i = 0; i < p(); ++i) {
    require(omega2[i] >= 0.0, "sr-sarv: omega2 must be >= 0");
    require(lambda[i] > 0.0, "sr-sarv: lambda must be > 0");
    if (i > 0) require(lambda[i] > lambda[i - 1], "sr-sarv: lambda must be strictly increasing");
  }
}

bool SrSarvParams::delta_method_regime() const { return sum_omega2() < 8.0 * sigma2 * sigma2; }

double NoiseParams::f_of_m(double m) const {
  require(m >= 1.0, "f(m): m must be >= 1");
  if (f_coef == 0.0) return 0.0;
  return f_coef * std::pow(m, 0.5 * (1.0 - alpha));
}

double NoiseParams::omega_delta() const {
  double s2 = sigma_delta2();
  return delta_kurtosis * s2 * s2;
}

std::vector<double> NoiseParams::omega() const {
  std::size_t qq = q();
  std::vector<double> w(qq + 1, 0.0);
  auto psi_at = [&](std::size_t i) { return i == 0 ? 1.0 : psi[i - 1]; };
  double s2 = sigma_zeta * sigma_zeta;
  for (std::size_t n = 0; n <= qq; ++n) {
    double acc = 0.0;
    for (std::size_t i = 0; i + n <= qq; ++i) acc += psi_at(i) * psi_at(i + n);
    w[n] = s2 * acc;
  }
  return w;
}

double NoiseParams::noise_variance(double m) const {
  double f = f_of_m(m);
  return f * f / m + omega()[0] + sigma_delta2();
}

bool NoiseParams::is_zero() const {
  return f_coef == 0.0 && sigma_zeta == 0.0 && sigma_delta == 0.0;
}

void NoiseParams::validate() const {
  require(std::isfinite(f_coef) && std::isfinite(alpha), "noise: f and alpha must be finite");
  require(sigma_zeta >= 0.0, "noise: sigma_zeta must be >= 0");
  require(sigma_delta >= 0.0, "noise: sigma_delta must be >= 0");
  require(delta_kurtosis >= 1.0, "noise: delta kurtosis must be >= 1");
  for (double p : psi) require(std::isfinite(p), "noise: psi must be finite");
}

NoiseParams NoiseParams::reference() {
  NoiseParams n;
  n.f_coef = 0.01;
  n.alpha = 0.6;
  n.psi = {0.3};
  n.sigma_zeta = 0.01017046;
  n.sigma_delta = 1e-4;
  return n;
}

HestonParams reference_heston() { return {-std::log(0.98), 0.5, 0.25, 0.0}; }

SrSarvParams sr_sarv_from_heston(const HestonParams& h) {
  h.validate();
  SrSarvParams s;
  s.sigma2 = h.sigma2;
  s.lambda = {h.kappa};
  s.omega2 = {h.gamma * h.gamma * h.sigma2 / (2.0 * h.kappa)};
  return s;
}

double true_f_of_m(const NoiseParams& n, double m) { return n.f_of_m(m); }

std::vector<double> IntradayPanel::returns(std::size_t day, std::size_t m_sub, bool observed) const {
  require(day < n_days, "panel: day index out of range");
  require(m_sub >= 1 && m % m_sub == 0, "panel: frequency " + std::to_string(m_sub) +
                                            " does not divide m=" + std::to_string(m));
  const auto& p = observed ? p_obs : p_true;
  require(!p.empty(), "panel: requested price series is not available");
  std::size_t step = m / m_sub;
  std::size_t base = day * m;
  std::vector<double> r(m_sub);
  for (std::size_t j = 0; j < m_sub; ++j) r[j] = p[base + (j + 1) * step] - p[base + j * step];
  return r;
}

std::vector<double> IntradayPanel::pooled_returns(std::size_t m_sub, bool observed) const {
  std::vector<double> out;
  out.reserve(n_days * m_sub);
  for (std::size_t d = 0; d < n_days; ++d) {
    auto r = returns(d, m_sub, observed);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<double> IntradayPanel::noise(std::size_t day) const {
  require(has_truth(), "panel: noise needs the true price");
  require(day < n_days, "panel: day index out of range");
  std::vector<double> e(m);
  for (std::size_t i = 1; i <= m; ++i) e[i - 1] = p_obs[day * m + i] - p_true[day * m + i];
  return e;
}

void IntradayPanel::validate() const {
  require(m >= 1, "panel: m must be >= 1");
  require(p_obs.size() == n_days * m + 1, "panel: p_obs must have N*m+1 entries");
  require(p_true.empty() || p_true.size() == p_obs.size(), "panel: p_true length mismatch");
  require(iv_true.empty() || iv_true.size() == n_days, "panel: iv_true must have N entries");
  require(missing.empty() || missing.size() == n_days, "panel: missing must have N entries");
  require(day_labels.empty() || day_labels.size() == n_days, "panel: labels must have N entries");
  for (double v : iv_true) require(v >= 0.0, "panel: iv_true must be >= 0");
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), 0x6d6e7276u};
  return std::mt19937_64(seq);
}

class DeltaDraw {
 public:
  explicit DeltaDraw(const NoiseParams& n) : sd_(n.sigma_delta), k_(n.delta_kurtosis) {}

  double operator()(std::mt19937_64& g) {
    if (sd_ == 0.0) return 0.0;
    double z = normal_(g);
    if (k_ == 3.0) return sd_ * z;
    double u = unif_(g);
    if (k_ > 3.0) {
      double p = 3.0 / k_;
      return u < p ? sd_ * z / std::sqrt(p) : 0.0;
    }
    double w = 0.5 * (3.0 - k_);
    if (u < w) return z < 0.0 ? -sd_ : sd_;
    return sd_ * z;
  }

 private:
  double sd_, k_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> unif_;
};

}  // namespace

IntradayPanel simulate_panel(const HestonParams& h, const NoiseParams& n, const SimOptions& opt) {
  h.validate();
  n.validate();
  require(opt.n_days >= 1, "simulate: n_days must be >= 1");
  require(opt.m >= 1, "simulate: m must be >= 1");
  require(opt.sub_steps >= 1, "simulate: sub_steps must be >= 1");
  std::size_t per_day = 0, total = 0;
  if (__builtin_mul_overflow(opt.m, opt.sub_steps, &per_day) ||
      __builtin_mul_overflow(per_day, opt.n_days, &total) || per_day > (std::size_t{1} << 40))
    fail(ErrorKind::invalid_argument, "simulate: m * sub_steps overflows");

  const std::size_t m = opt.m, N = opt.n_days;
  IntradayPanel P;
  P.n_days = N;
  P.m = m;
  P.sub_steps = opt.sub_steps;
  P.p_true.assign(N * m + 1, 0.0);
  P.p_obs.assign(N * m + 1, 0.0);
  P.iv_true.assign(N, 0.0);
  P.iq_true.assign(N, 0.0);
  P.missing.assign(N, 0);
  if (opt.store_sigma2_path) P.sigma2_path.assign(N * m + 1, 0.0);
  P.generator = GeneratorInfo{h, n, opt.seed, opt.stationary_start};

  auto price_rng = stream(opt.seed, 1);
  auto zeta_rng = stream(opt.seed, 2);
  auto delta_rng = stream(opt.seed, 3);
  auto init_rng = stream(opt.seed, 4);
  std::normal_distribution<double> normal;
  DeltaDraw delta(n);

  const double dt = 1.0 / static_cast<double>(per_day);
  const double sqdt = std::sqrt(dt);
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - h.rho * h.rho));
  const double f = n.f_of_m(static_cast<double>(m));
  const std::size_t q = n.q();

  double v = h.sigma2;
  if (opt.stationary_start && h.gamma > 0.0) {
    double scale = h.gamma * h.gamma / (2.0 * h.kappa);
    std::gamma_distribution<double> g(h.sigma2 / scale, scale);
    v = g(init_rng);
  }

  // zeta history, most recent first; the pre-sample values are drawn like any other.
  std::deque<double> zeta_hist;
  for (std::size_t i = 0; i < q; ++i) zeta_hist.push_back(n.sigma_zeta * normal(zeta_rng));
  auto next_noise = [&](double dw_interval) {
    double zeta = n.sigma_zeta * normal(zeta_rng);
    double ma = zeta;
    for (std::size_t i = 0; i < q; ++i) ma += n.psi[i] * zeta_hist[i];
    if (q > 0) {
      zeta_hist.push_front(zeta);
      zeta_hist.pop_back();
    }
    return f * dw_interval + ma + delta(delta_rng);
  };

  double p = 0.0;
  double pre = normal(init_rng) / std::sqrt(static_cast<double>(m));
  P.p_obs[0] = p + next_noise(pre);
  if (opt.store_sigma2_path) P.sigma2_path[0] = v;

  for (std::size_t d = 0; d < N; ++d) {
    double iv = 0.0, iq = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
      double dw_interval = 0.0;
      for (std::size_t s = 0; s < opt.sub_steps; ++s) {
        double vp = v > 0.0 ? v : 0.0;
        double sv = std::sqrt(vp);
        double z1 = normal(price_rng);
        double z2 = normal(price_rng);
        double dw1 = sqdt * z1;
        double dw2 = h.rho * dw1 + rho_c * sqdt * z2;
        iv += vp * dt;
        iq += vp * vp * dt;
        p += -0.5 * vp * dt + sv * dw1;
        v = v + h.kappa * (h.sigma2 - vp) * dt + h.gamma * sv * dw2;
        if (v < 0.0) v = 0.0;
        dw_interval += dw1;
      }
      std::size_t k = d * m + i;
      P.p_true[k] = p;
      P.p_obs[k] = p + next_noise(dw_interval);
      if (opt.store_sigma2_path) P.sigma2_path[k] = v;
    }
    P.iv_true[d] = iv;
    P.iq_true[d] = iq;
  }
  return P;
}

}  // namespace mnrv
