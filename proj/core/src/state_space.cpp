#include "mnrv/state_space.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "mnrv/error.hpp"

namespace mnrv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void SsmSpec::validate() const {
  const auto n = transition.rows();
  require(n >= 1 && transition.cols() == n, "ssm: transition must be square");
  require(state_intercept.size() == n, "ssm: state intercept has the wrong size");
  require(state_cov.rows() == n && state_cov.cols() == n, "ssm: state covariance has the wrong size");
  require(loading.size() == n, "ssm: loading has the wrong size");
  require(obs_var >= 0.0, "ssm: observation variance must be >= 0");
  require(transition.allFinite() && state_cov.allFinite() && loading.allFinite() &&
              state_intercept.allFinite() && std::isfinite(obs_intercept) && std::isfinite(obs_var),
          "ssm: non-finite system matrices");
  require((state_cov - state_cov.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * (1.0 + state_cov.cwiseAbs().maxCoeff()),
          "ssm: state covariance must be symmetric");
}

double spectral_radius(const MatrixXd& T) {
  if (T.rows() == 1) return std::abs(T(0, 0));
  Eigen::EigenSolver<MatrixXd> es(T, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<VectorXd, MatrixXd> stationary_init(const SsmSpec& spec) {
  spec.validate();
  const auto n = spec.transition.rows();
  if (spectral_radius(spec.transition) >= 1.0 - 1e-12)
    fail(ErrorKind::numerical, "stationary init: transition has a unit root; use diffuse initialization");
  const MatrixXd I = MatrixXd::Identity(n, n);
  VectorXd mu = (I - spec.transition).partialPivLu().solve(spec.state_intercept);

  // (I - T kron T) vec(P) = vec(Q)
  MatrixXd K(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K.block(i * n, j * n, n, n) = spec.transition(i, j) * spec.transition;
  K = MatrixXd::Identity(n * n, n * n) - K;
  VectorXd q = Eigen::Map<const VectorXd>(spec.state_cov.data(), n * n);
  VectorXd p = K.partialPivLu().solve(q);
  MatrixXd P = Eigen::Map<MatrixXd>(p.data(), n, n);
  P = 0.5 * (P + P.transpose());
  return {mu, P};
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

template <int MaxN>
struct Work {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, MaxN, MaxN>;
  using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, MaxN, 1>;
  using Row = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, MaxN>;
};

std::pair<VectorXd, MatrixXd> initial_moments(const SsmSpec& spec, const StateInit& init) {
  const auto n = spec.transition.rows();
  switch (init.kind) {
    case StateInit::Kind::stationary: return stationary_init(spec);
    case StateInit::Kind::explicit_moments:
      require(init.mean.size() == n && init.cov.rows() == n && init.cov.cols() == n,
              "filter: explicit initial moments have the wrong size");
      return {init.mean, init.cov};
    case StateInit::Kind::diffuse:
      return {VectorXd::Zero(n), init.diffuse_scale * MatrixXd::Identity(n, n)};
  }
  return {};
}

[[noreturn]] void bad_variance(std::size_t t, double F) {
  fail(ErrorKind::numerical,
       "kalman filter: innovation variance " + std::to_string(F) + " is not positive at t=" + std::to_string(t));
}

template <int MaxN>
double loglik_fixed(const SsmSpec& spec, std::span<const double> y, const VectorXd& a0, const MatrixXd& P0) {
  using W = Work<MaxN>;
  const auto n = spec.transition.rows();
  typename W::Mat T = spec.transition, Q = spec.state_cov, P = P0, A(n, n), I = W::Mat::Identity(n, n);
  typename W::Vec c = spec.state_intercept, a = a0, K(n), PZ(n);
  typename W::Row Z = spec.loading;
  const double d = spec.obs_intercept, h = spec.obs_var;
  double ll = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    PZ.noalias() = P * Z.transpose();
    const double F = Z.dot(PZ) + h;
    if (!(F > 0.0) || !std::isfinite(F)) bad_variance(t, F);
    const double v = y[t] - d - Z.dot(a);
    ll += -0.5 * (kLog2Pi + std::log(F) + v * v / F);
    K = PZ / F;
    a += K * v;
    A.noalias() = I - K * Z;
    typename W::Mat Pf = A * P * A.transpose();
    Pf.noalias() += h * K * K.transpose();
    typename W::Vec an = c;
    an.noalias() += T * a;
    a = an;
    P.noalias() = T * Pf * T.transpose();
    P += Q;
  }
  return ll;
}

}  // namespace

double kalman_loglik(const SsmSpec& spec, std::span<const double> y, const StateInit& init) {
  spec.validate();
  auto [a0, P0] = initial_moments(spec, init);
  if (spec.state_dim() <= 8) return loglik_fixed<8>(spec, y, a0, P0);
  return loglik_fixed<Eigen::Dynamic>(spec, y, a0, P0);
}

FilterOutput kalman_filter(const SsmSpec& spec, std::span<const double> y, const StateInit& init, bool smooth) {
  spec.validate();
  for (std::size_t t = 0; t < y.size(); ++t)
    require(std::isfinite(y[t]), "kalman filter: observation " + std::to_string(t) + " is not finite");
  const auto n = spec.transition.rows();
  const std::size_t N = y.size();
  auto [a, P] = initial_moments(spec, init);
  const MatrixXd& T = spec.transition;
  const Eigen::RowVectorXd& Z = spec.loading;
  const MatrixXd I = MatrixXd::Identity(n, n);
  const double h = spec.obs_var;

  FilterOutput out;
  out.predicted_mean.resize(N);
  out.predicted_cov.resize(N);
  out.filtered_mean.resize(N);
  out.filtered_cov.resize(N);
  out.innovations.resize(static_cast<Eigen::Index>(N));
  out.innovation_vars.resize(static_cast<Eigen::Index>(N));
  std::vector<VectorXd> gains(N);

  for (std::size_t t = 0; t < N; ++t) {
    out.predicted_mean[t] = a;
    out.predicted_cov[t] = P;
    VectorXd PZ = P * Z.transpose();
    const double F = Z.dot(PZ) + h;
    if (!(F > 0.0) || !std::isfinite(F)) bad_variance(t, F);
    const double v = y[t] - spec.obs_intercept - Z.dot(a);
    out.loglik += -0.5 * (kLog2Pi + std::log(F) + v * v / F);
    out.innovations[static_cast<Eigen::Index>(t)] = v;
    out.innovation_vars[static_cast<Eigen::Index>(t)] = F;
    VectorXd K = PZ / F;
    gains[t] = K;
    VectorXd af = a + K * v;
    MatrixXd A = I - K * Z;
    MatrixXd Pf = A * P * A.transpose() + h * K * K.transpose();
    out.filtered_mean[t] = af;
    out.filtered_cov[t] = Pf;
    a = spec.state_intercept + T * af;
    P = T * Pf * T.transpose() + spec.state_cov;
  }
  out.next_mean = a;
  out.next_cov = P;

  if (smooth && N > 0) {
    out.smoothed_mean.resize(N);
    out.smoothed_cov.resize(N);
    VectorXd r = VectorXd::Zero(n);
    MatrixXd Nm = MatrixXd::Zero(n, n);
    for (std::size_t k = N; k-- > 0;) {
      const double F = out.innovation_vars[static_cast<Eigen::Index>(k)];
      const double v = out.innovations[static_cast<Eigen::Index>(k)];
      MatrixXd L = T * (I - gains[k] * Z);
      r = Z.transpose() * (v / F) + L.transpose() * r;
      Nm = Z.transpose() * Z / F + L.transpose() * Nm * L;
      const MatrixXd& Pp = out.predicted_cov[k];
      out.smoothed_mean[k] = out.predicted_mean[k] + Pp * r;
      MatrixXd V = Pp - Pp * Nm * Pp;
      out.smoothed_cov[k] = 0.5 * (V + V.transpose());
    }
  }
  return out;
}

}  // namespace mnrv
