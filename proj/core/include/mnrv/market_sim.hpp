#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mnrv {

struct HestonParams {
  double kappa = 0.0;   // mean reversion per day
  double sigma2 = 0.0;  // long-run variance, daily units
  double gamma = 0.0;   // vol of vol
  double rho = 0.0;     // leverage correlation

  void validate() const;
};

struct SrSarvParams {
  double sigma2 = 0.0;
  std::vector<double> omega2;
  std::vector<double> lambda;

  std::size_t p() const { return lambda.size(); }
  double sum_omega2() const;
  void validate() const;
  // False when sum(omega2) >= 8 sigma^4; the delta approximation of E[sigma(t)] is unreliable there.
  bool delta_method_regime() const;
};

struct NoiseParams {
  double f_coef = 0.0;
  double alpha = 1.0;
  std::vector<double> psi;  // Psi_1..Psi_q
  double sigma_zeta = 0.0;
  double sigma_delta = 0.0;
  double delta_kurtosis = 3.0;  // E[delta^4] / sigma_delta^4

  std::size_t q() const { return psi.size(); }
  double f_of_m(double m) const;
  double sigma_delta2() const { return sigma_delta * sigma_delta; }
  double omega_delta() const;           // E[delta^4]
  std::vector<double> omega() const;    // autocovariances of the MA(q) part, lags 0..q
  double noise_variance(double m) const;  // Var[eps_t]
  bool is_zero() const;
  void validate() const;

  static NoiseParams none() { return {}; }
  static NoiseParams reference();  // the default dependent-noise configuration
};

HestonParams reference_heston();

struct GeneratorInfo {
  HestonParams heston;
  NoiseParams noise;
  std::uint64_t seed = 0;
  bool stationary_start = true;
};

struct IntradayPanel {
  std::size_t n_days = 0;
  std::size_t m = 0;
  std::size_t sub_steps = 0;
  std::vector<double> p_true;  // empty for ingested data
  std::vector<double> p_obs;
  std::vector<double> iv_true;
  std::vector<double> iq_true;  // integrated quarticity, used by the oracle bandwidth
  std::vector<double> sigma2_path;
  std::vector<int> missing;  // empty grid slots per day before filling
  std::vector<std::string> day_labels;
  std::optional<GeneratorInfo> generator;

  bool has_truth() const { return !p_true.empty(); }
  // Returns of one day sampled every m/m_sub grid points.
  std::vector<double> returns(std::size_t day, std::size_t m_sub, bool observed = true) const;
  // All returns of all days at frequency m_sub, day after day.
  std::vector<double> pooled_returns(std::size_t m_sub, bool observed = true) const;
  // Noise eps = p_obs - p_true on the grid points 1..m of one day.
  std::vector<double> noise(std::size_t day) const;
  void validate() const;
};

struct SimOptions {
  std::size_t n_days = 0;
  std::size_t m = 0;
  std::size_t sub_steps = 60;
  std::uint64_t seed = 0;
  bool store_sigma2_path = false;
  bool stationary_start = true;  // draw sigma2(0) from the stationary law, otherwise start at sigma2
};

SrSarvParams sr_sarv_from_heston(const HestonParams& h);
double true_f_of_m(const NoiseParams& n, double m);
IntradayPanel simulate_panel(const HestonParams& h, const NoiseParams& n, const SimOptions& opt);

}  // namespace mnrv
