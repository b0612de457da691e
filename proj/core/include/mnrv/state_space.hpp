#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace mnrv {

// Univariate-observation linear Gaussian state-space model:
//   y_t     = d + Z a_t + e_t,        e_t ~ N(0, h)
//   a_{t+1} = c + T a_t + w_t,        w_t ~ N(0, Q)
struct SsmSpec {
  Eigen::MatrixXd transition;
  Eigen::VectorXd state_intercept;
  Eigen::MatrixXd state_cov;
  Eigen::RowVectorXd loading;
  double obs_intercept = 0.0;
  double obs_var = 0.0;

  std::size_t state_dim() const { return static_cast<std::size_t>(transition.rows()); }
  void validate() const;
};

struct StateInit {
  enum class Kind { stationary, explicit_moments, diffuse };
  Kind kind = Kind::stationary;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double diffuse_scale = 1e7;

  static StateInit stationary() { return {}; }
  static StateInit with_moments(Eigen::VectorXd a, Eigen::MatrixXd P) {
    return {Kind::explicit_moments, std::move(a), std::move(P), 0.0};
  }
  static StateInit diffuse(double scale = 1e7) { return {Kind::diffuse, {}, {}, scale}; }
};

struct FilterOutput {
  std::vector<Eigen::VectorXd> predicted_mean;  // a_{t|t-1}
  std::vector<Eigen::MatrixXd> predicted_cov;
  std::vector<Eigen::VectorXd> filtered_mean;  // a_{t|t}
  std::vector<Eigen::MatrixXd> filtered_cov;
  std::vector<Eigen::VectorXd> smoothed_mean;  // a_{t|T}
  std::vector<Eigen::MatrixXd> smoothed_cov;
  Eigen::VectorXd innovations;
  Eigen::VectorXd innovation_vars;
  Eigen::VectorXd next_mean;  // a_{T|T-1}
  Eigen::MatrixXd next_cov;
  double loglik = 0.0;
};

double spectral_radius(const Eigen::MatrixXd& T);

// Unconditional mean and covariance of the state. Throws on a unit root.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> stationary_init(const SsmSpec& spec);

FilterOutput kalman_filter(const SsmSpec& spec, std::span<const double> y,
                           const StateInit& init = StateInit::stationary(), bool smooth = true);

// Log-likelihood only, no per-step storage.
double kalman_loglik(const SsmSpec& spec, std::span<const double> y,
                     const StateInit& init = StateInit::stationary());

}  // namespace mnrv
