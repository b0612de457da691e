#include "mnrv/qmle.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "mnrv/error.hpp"

namespace mnrv {

using Eigen::VectorXd;

double FitResult::param(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[static_cast<Eigen::Index>(i)];
  fail(ErrorKind::invalid_argument, "fit result has no parameter '" + name + "'");
}

namespace {

constexpr double kPenalty = 1e30;

void quiet_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct Objective {
  const QmleProblem* problem;
  std::size_t evals = 0;

  // Negative log-likelihood with rejection mapped to a large finite value.
  double operator()(const VectorXd& x) {
    ++evals;
    double ll;
    try {
      ll = problem->loglik(x);
    } catch (const std::exception&) {
      return kPenalty;
    }
    if (!std::isfinite(ll)) return kPenalty;
    return -ll;
  }
};

VectorXd to_eigen(const gsl_vector* v) {
  VectorXd x(static_cast<Eigen::Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) x[static_cast<Eigen::Index>(i)] = gsl_vector_get(v, i);
  return x;
}

void to_gsl(const VectorXd& x, gsl_vector* v) {
  for (std::size_t i = 0; i < v->size; ++i) gsl_vector_set(v, i, x[static_cast<Eigen::Index>(i)]);
}

double fd_step(double x, double rel) { return rel * std::max(1.0, std::abs(x)); }

VectorXd fd_gradient(Objective& f, const VectorXd& x, double rel) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = fd_step(x[i], rel);
    VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Symmetric finite-difference Hessian of the negative log-likelihood.
Eigen::MatrixXd fd_hessian(Objective& f, const VectorXd& x, double rel) {
  const Eigen::Index k = x.size();
  Eigen::MatrixXd H(k, k);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < k; ++i) {
    double hi = fd_step(x[i], rel) * 10.0;
    for (Eigen::Index j = i; j < k; ++j) {
      double hj = fd_step(x[j], rel) * 10.0;
      if (i == j) {
        VectorXd xp = x, xm = x;
        xp[i] += hi;
        xm[i] -= hi;
        H(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (hi * hi);
      } else {
        VectorXd a = x, b = x, c = x, d = x;
        a[i] += hi; a[j] += hj;
        b[i] += hi; b[j] -= hj;
        c[i] -= hi; c[j] += hj;
        d[i] -= hi; d[j] -= hj;
        H(i, j) = H(j, i) = (f(a) - f(b) - f(c) + f(d)) / (4.0 * hi * hj);
      }
    }
  }
  return H;
}

struct GslCtx {
  Objective* f;
  double rel;
};

double gsl_f(const gsl_vector* v, void* p) { return (*static_cast<GslCtx*>(p)->f)(to_eigen(v)); }

void gsl_df(const gsl_vector* v, void* p, gsl_vector* g) {
  auto* ctx = static_cast<GslCtx*>(p);
  to_gsl(fd_gradient(*ctx->f, to_eigen(v), ctx->rel), g);
}

void gsl_fdf(const gsl_vector* v, void* p, double* f, gsl_vector* g) {
  *f = gsl_f(v, p);
  gsl_df(v, p, g);
}

struct RunOutcome {
  StartDiagnostic diag;
  VectorXd raw;
  std::vector<TraceRow> trace;
};

RunOutcome run_start(const QmleProblem& problem, const VectorXd& x0, std::size_t index, const QmleOptions& opt) {
  RunOutcome out;
  out.diag.index = index;
  Objective f{&problem};
  GslCtx ctx{&f, opt.fd_step};
  const std::size_t k = static_cast<std::size_t>(x0.size());

  double f_start = f(x0);
  if (f_start >= kPenalty) {
    out.diag.message = "start point is infeasible";
    return out;
  }

  // Stage 1: simplex.
  gsl_multimin_function fn{&gsl_f, k, &ctx};
  gsl_vector* x = gsl_vector_alloc(k);
  gsl_vector* step = gsl_vector_alloc(k);
  to_gsl(x0, x);
  gsl_vector_set_all(step, 0.3);
  gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, k);
  gsl_multimin_fminimizer_set(nm, &fn, x, step);
  std::size_t iter = 0;
  double prev = nm->fval;
  std::size_t still = 0;
  for (; iter < opt.max_iter; ++iter) {
    if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
    if (opt.trace) out.trace.push_back({index, "simplex", iter, -nm->fval});
    double size = gsl_multimin_fminimizer_size(nm);
    if (gsl_multimin_test_size(size, 1e-6) == GSL_SUCCESS) break;
    double rel = std::abs(prev - nm->fval) / std::max(1.0, std::abs(nm->fval));
    still = rel < opt.rel_tol ? still + 1 : 0;
    if (still >= 5 * k && size < 1e-3) break;
    prev = nm->fval;
  }
  VectorXd xs = to_eigen(gsl_multimin_fminimizer_x(nm));
  gsl_multimin_fminimizer_free(nm);

  // Stage 2: quasi-Newton.
  gsl_multimin_function_fdf fdf{&gsl_f, &gsl_df, &gsl_fdf, k, &ctx};
  to_gsl(xs, x);
  gsl_multimin_fdfminimizer* qn = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, k);
  gsl_multimin_fdfminimizer_set(qn, &fdf, x, 0.01, 0.1);
  std::size_t qiter = 0;
  bool capped = true;
  prev = qn->f;
  for (; qiter < opt.max_iter; ++qiter) {
    int status = gsl_multimin_fdfminimizer_iterate(qn);
    if (opt.trace) out.trace.push_back({index, "bfgs", qiter, -qn->f});
    if (status != GSL_SUCCESS) {
      capped = false;
      break;
    }
    if (gsl_multimin_test_gradient(qn->gradient, opt.grad_tol) == GSL_SUCCESS) {
      capped = false;
      break;
    }
    double rel = std::abs(prev - qn->f) / std::max(1.0, std::abs(qn->f));
    if (rel < opt.rel_tol && qiter > 0) {
      capped = false;
      break;
    }
    prev = qn->f;
  }
  VectorXd xq = to_eigen(qn->x);
  double fq = qn->f;
  gsl_multimin_fdfminimizer_free(qn);
  gsl_vector_free(x);
  gsl_vector_free(step);

  double fs = f(xs);
  VectorXd best = fq <= fs ? xq : xs;
  double fbest = std::min(fq, fs);
  if (fbest >= kPenalty) {
    out.diag.message = "optimizer ended at an infeasible point";
    return out;
  }

  VectorXd g = fd_gradient(f, best, opt.fd_step);
  out.diag.grad_norm = g.norm();
  out.diag.n_iter = iter + qiter;
  out.diag.loglik = -fbest;
  out.diag.ok = true;
  out.raw = best;
  out.diag.natural = problem.to_natural ? problem.to_natural(best) : best;

  bool curved = true;
  {
    Eigen::MatrixXd H = fd_hessian(f, best, opt.fd_step);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    double top = es.eigenvalues().cwiseAbs().maxCoeff();
    curved = es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 1e-8 * std::max(1.0, top);
  }
  out.diag.converged = out.diag.grad_norm < opt.grad_tol && !capped && curved;
  if (!out.diag.converged) {
    if (capped) out.diag.message = "iteration limit reached";
    else if (!curved) out.diag.message = "flat or non-concave direction at the optimum";
    else out.diag.message = "gradient norm above tolerance";
  }
  return out;
}

}  // namespace

FitResult qmle_maximize(const QmleProblem& problem, const VectorXd& natural_start, const QmleOptions& opt) {
  require(static_cast<bool>(problem.loglik), "qmle: objective is not set");
  quiet_gsl();
  require(opt.starts >= 1, "qmle: need at least one start");
  require(natural_start.size() >= 1, "qmle: empty parameter vector");
  auto from_nat = [&](const VectorXd& v) { return problem.from_natural ? problem.from_natural(v) : v; };

  std::vector<VectorXd> starts;
  starts.push_back(from_nat(natural_start));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-opt.perturb, opt.perturb);
  for (std::size_t s = 1; s < opt.starts; ++s) {
    VectorXd nat = natural_start;
    for (Eigen::Index i = 0; i < nat.size(); ++i) nat[i] *= 1.0 + u(rng);
    try {
      starts.push_back(from_nat(nat));
    } catch (const std::exception&) {
      starts.push_back(starts.front());
    }
  }

  std::vector<RunOutcome> runs(starts.size());
  auto work = [&](std::size_t i) {
    try {
      runs[i] = run_start(problem, starts[i], i, opt);
    } catch (const std::exception& e) {
      runs[i].diag.index = i;
      runs[i].diag.message = e.what();
    }
  };
  std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, starts.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::mutex mu;
    std::size_t next = 0;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= starts.size()) return;
            i = next++;
          }
          work(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  FitResult res;
  res.names = problem.names;
  std::size_t best = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    res.starts.push_back(runs[i].diag);
    res.trace.insert(res.trace.end(), runs[i].trace.begin(), runs[i].trace.end());
    if (runs[i].diag.ok && (best == runs.size() || runs[i].diag.loglik > runs[best].diag.loglik)) best = i;
  }
  if (best == runs.size()) {
    std::string msg = "qmle: all starts failed:";
    for (const auto& d : res.starts) msg += " [" + std::to_string(d.index) + "] " + d.message + ";";
    fail(ErrorKind::convergence, msg);
  }
  const auto& r = runs[best];
  res.params = r.diag.natural;
  res.raw = r.raw;
  res.loglik = r.diag.loglik;
  res.converged = r.diag.converged;
  res.n_iter = r.diag.n_iter;
  res.start_index = best;
  res.grad_norm = r.diag.grad_norm;
  return res;
}

}  // namespace mnrv
