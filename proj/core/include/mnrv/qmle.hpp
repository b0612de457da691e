#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mnrv {

// A maximization problem posed in unconstrained coordinates. The objective may
// return -inf (or throw) to reject a point.
struct QmleProblem {
  std::vector<std::string> names;
  std::function<double(const Eigen::VectorXd&)> loglik;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> to_natural;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> from_natural;
};

struct QmleOptions {
  std::size_t max_iter = 500;
  double rel_tol = 1e-8;
  double grad_tol = 1e-4;
  double fd_step = 1e-5;
  std::size_t starts = 3;
  double perturb = 0.5;  // multiplicative, natural units
  std::uint64_t seed = 20240601;
  std::size_t jobs = 1;
  bool trace = false;
};

struct TraceRow {
  std::size_t start = 0;
  std::string stage;
  std::size_t iter = 0;
  double loglik = 0.0;
};

struct StartDiagnostic {
  std::size_t index = 0;
  bool ok = false;
  bool converged = false;
  double loglik = 0.0;
  double grad_norm = 0.0;
  std::size_t n_iter = 0;
  std::string message;
  Eigen::VectorXd natural;
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd params;  // natural units
  Eigen::VectorXd raw;     // optimizer coordinates
  double loglik = 0.0;
  bool converged = false;
  std::size_t n_iter = 0;
  std::size_t start_index = 0;
  double grad_norm = 0.0;
  std::vector<StartDiagnostic> starts;
  std::vector<TraceRow> trace;

  double param(const std::string& name) const;
};

// Nelder-Mead simplex followed by BFGS with central finite-difference gradients,
// repeated from perturbed starts; the best start wins.
FitResult qmle_maximize(const QmleProblem& problem, const Eigen::VectorXd& natural_start,
                        const QmleOptions& options = {});

}  // namespace mnrv
