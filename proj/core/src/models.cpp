#include "mnrv/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mnrv/error.hpp"
#include "mnrv/numeric.hpp"
#include "mnrv/realized.hpp"

namespace mnrv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::BSM: return "bsm";
    case ModelKind::NW: return "nw";
    case ModelKind::ZeroF: return "zerof";
    case ModelKind::WeakF: return "weakf";
  }
  return "?";
}

ModelKind model_from_string(const std::string& s) {
  if (s == "bsm") return ModelKind::BSM;
  if (s == "nw") return ModelKind::NW;
  if (s == "zerof" || s == "zero-f") return ModelKind::ZeroF;
  if (s == "weakf" || s == "weak-f") return ModelKind::WeakF;
  fail(ErrorKind::invalid_argument, "unknown model '" + s + "' (bsm, nw, zerof, weakf)");
}

// ---------------------------------------------------------------------------
// IV dynamics

namespace {

// e^{-x} - 1 + x without cancellation for small x.
double expm1_plus(double x) {
  if (std::abs(x) < 1e-2) {
    double x2 = x * x;
    return x2 * (0.5 - x / 6.0 + x2 / 24.0 - x * x2 / 120.0 + x2 * x2 / 720.0);
  }
  return std::expm1(-x) + x;
}

}  // namespace

double iv_autocov(const SrSarvParams& sr, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < sr.p(); ++i) {
    const double l = sr.lambda[i], w = sr.omega2[i];
    if (n == 0) {
      s += w * 2.0 * expm1_plus(l) / (l * l);
    } else {
      double a = -std::expm1(-l);
      s += w * std::exp(-l * static_cast<double>(n - 1)) * a * a / (l * l);
    }
  }
  return s;
}

double discretization_variance(const SrSarvParams& sr, double m) {
  double s = 0.0;
  for (std::size_t i = 0; i < sr.p(); ++i) {
    const double l = sr.lambda[i];
    s += sr.omega2[i] * expm1_plus(l / m) / (l * l);
  }
  return 2.0 * sr.sigma2 * sr.sigma2 / m + 4.0 * m * s;
}

namespace {

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

std::vector<double> ma_autocov(const std::vector<double>& theta, double s2) {
  std::vector<double> t(theta.size() + 1, 1.0);
  for (std::size_t i = 0; i < theta.size(); ++i) t[i + 1] = theta[i];
  std::vector<double> g(t.size(), 0.0);
  for (std::size_t k = 0; k < t.size(); ++k)
    for (std::size_t j = 0; j + k < t.size(); ++j) g[k] += s2 * t[j] * t[j + k];
  return g;
}

// Invertible MA(p) factor of an autocovariance sequence g_0..g_p.
std::pair<std::vector<double>, double> factor_ma(const std::vector<double>& g) {
  const std::size_t p = g.size() - 1;
  if (!(g[0] > 0.0)) fail(ErrorKind::numerical, "ma factorization: non-positive variance");
  std::size_t eff = p;
  while (eff > 0 && std::abs(g[eff]) <= 1e-15 * g[0]) --eff;
  std::vector<double> theta(p, 0.0);
  if (eff == 0) return {theta, g[0]};
  if (eff == 1 && p == 1) {
    double disc = g[0] * g[0] - 4.0 * g[1] * g[1];
    if (disc < -1e-14 * g[0] * g[0]) fail(ErrorKind::numerical, "ma factorization: autocovariance is not PSD");
    disc = std::max(disc, 0.0);
    theta[0] = 2.0 * g[1] / (g[0] + std::sqrt(disc));
    return {theta, g[1] / theta[0]};
  }
  // z^eff * sum_k g_|k| z^k, degree 2 eff; roots come in reciprocal pairs.
  const std::size_t deg = 2 * eff;
  std::vector<double> coef(deg + 1);
  for (std::size_t i = 0; i <= deg; ++i) {
    long k = static_cast<long>(i) - static_cast<long>(eff);
    coef[i] = g[static_cast<std::size_t>(std::labs(k))];
  }
  MatrixXd C = MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
  for (std::size_t i = 0; i < deg; ++i) C(0, static_cast<Eigen::Index>(i)) = -coef[deg - 1 - i] / coef[deg];
  for (std::size_t i = 1; i < deg; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  Eigen::EigenSolver<MatrixXd> es(C, false);
  std::vector<std::complex<double>> roots;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) roots.push_back(es.eigenvalues()[i]);
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  std::vector<std::complex<double>> poly{1.0};
  for (std::size_t i = 0; i < eff; ++i) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      next[j] += poly[j];
      next[j + 1] -= poly[j] / roots[i];
    }
    poly = next;
  }
  for (std::size_t i = 1; i <= eff; ++i) theta[i - 1] = poly[i].real();
  double ss = 1.0;
  for (double t : theta) ss += t * t;
  double s2 = g[0] / ss;
  auto check = ma_autocov(theta, s2);
  for (std::size_t k = 0; k <= p; ++k)
    if (std::abs(check[k] - g[k]) > 1e-8 * g[0])
      fail(ErrorKind::numerical, "ma factorization: residual autocovariance is not PSD");
  return {theta, s2};
}

}  // namespace

std::vector<double> arma_autocov(const std::vector<double>& phi, const std::vector<double>& theta, double sigma2,
                                 std::size_t max_lag) {
  const std::size_t r = std::max(phi.size(), theta.size() + 1);
  SsmSpec s;
  s.transition = MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < phi.size(); ++i) s.transition(static_cast<Eigen::Index>(i), 0) = phi[i];
  for (std::size_t i = 0; i + 1 < r; ++i)
    s.transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
  VectorXd R = VectorXd::Zero(static_cast<Eigen::Index>(r));
  R[0] = 1.0;
  for (std::size_t i = 0; i < theta.size(); ++i) R[static_cast<Eigen::Index>(i + 1)] = theta[i];
  s.state_cov = sigma2 * R * R.transpose();
  s.state_intercept = VectorXd::Zero(static_cast<Eigen::Index>(r));
  s.loading = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(r));
  s.loading[0] = 1.0;
  auto [mu, P] = stationary_init(s);
  std::vector<double> g(max_lag + 1);
  MatrixXd Tk = MatrixXd::Identity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t k = 0; k <= max_lag; ++k) {
    g[k] = (s.loading * Tk * P * s.loading.transpose())(0, 0);
    Tk = s.transition * Tk;
  }
  return g;
}

IvArmaMap iv_arma_map(const SrSarvParams& sr, double m) {
  sr.validate();
  require(m >= 1.0, "iv arma map: m must be >= 1");
  const std::size_t p = sr.p();
  IvArmaMap out;
  out.arma.p = p;
  // prod (1 - e^{-lambda_i} L) = 1 - phi_1 L - ... - phi_p L^p
  std::vector<double> ar{1.0};
  for (double l : sr.lambda) ar = poly_mul(ar, {1.0, -std::exp(-l)});
  out.arma.phi.resize(p);
  double sum_phi = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    out.arma.phi[i] = -ar[i + 1];
    sum_phi += out.arma.phi[i];
  }
  out.arma.c_iv = sr.sigma2 * (1.0 - sum_phi);
  out.sigma_d2 = discretization_variance(sr, m);

  if (sr.sum_omega2() == 0.0) {
    out.constant_iv = true;
    out.arma.theta.assign(p, 0.0);
    out.arma.sigma_eta2 = 0.0;
    return out;
  }
  // Autocovariance of w_t = ar(L) (IV_t - sigma^2), an MA(p).
  std::vector<double> gw(p + 1, 0.0);
  for (std::size_t k = 0; k <= p; ++k)
    for (std::size_t a = 0; a <= p; ++a)
      for (std::size_t b = 0; b <= p; ++b) {
        long lag = static_cast<long>(k) + static_cast<long>(a) - static_cast<long>(b);
        gw[k] += ar[a] * ar[b] * iv_autocov(sr, static_cast<std::size_t>(std::labs(lag)));
      }
  auto [theta, s2] = factor_ma(gw);
  out.arma.theta = theta;
  out.arma.sigma_eta2 = s2;
  return out;
}

// ---------------------------------------------------------------------------
// Model taxonomy and SSM assembly

namespace {

std::vector<std::string> factor_names(std::size_t p) {
  std::vector<std::string> n;
  for (std::size_t i = 1; i <= p; ++i) n.push_back("omega2_" + std::to_string(i));
  for (std::size_t i = 1; i <= p; ++i) n.push_back("lambda_" + std::to_string(i));
  return n;
}

}  // namespace

std::vector<std::string> ModelSpec::free_params() const {
  std::vector<std::string> n;
  if (kind == ModelKind::BSM || kind == ModelKind::NW) n.push_back("sigma2");
  auto f = factor_names(p);
  n.insert(n.end(), f.begin(), f.end());
  if (kind == ModelKind::NW) {
    n.push_back("sigma_eps2");
    n.push_back("omega_eps2");
  }
  if (kind == ModelKind::WeakF && !fixed_f) n.push_back("f_m");
  return n;
}

std::vector<std::string> ModelSpec::fixed_params() const {
  switch (kind) {
    case ModelKind::BSM:
    case ModelKind::NW: return {};
    case ModelKind::ZeroF: return {"sigma2", "c_u", "omega", "theta_u", "sigma_xi2"};
    case ModelKind::WeakF: {
      std::vector<std::string> n{"sigma2", "c_u", "omega_1..q"};
      if (fixed_f) n.push_back("f_m");
      return n;
    }
  }
  return {};
}

SsmForm ssm_form(const ModelSpec& spec, const ModelParams& params) {
  require(spec.m >= 1, "model: m must be >= 1");
  auto med = iv_arma_map(params.sr, static_cast<double>(spec.m));
  SsmForm f;
  f.arma = med.arma;
  f.sigma2 = params.sr.sigma2;
  f.sigma_d2 = med.sigma_d2;
  f.constant_iv = med.constant_iv;
  switch (spec.kind) {
    case ModelKind::BSM: break;
    case ModelKind::NW:
      f.has_u = true;
      f.u = nw_u_moments(params.sr.sigma2, params.sigma_eps2, params.omega_eps2, static_cast<double>(spec.m)).ma1;
      break;
    case ModelKind::ZeroF:
    case ModelKind::WeakF:
      f.has_u = true;
      f.u = params.u;
      break;
  }
  return f;
}

SsmSpec build_ssm(const SsmForm& form) {
  const std::size_t p = form.arma.phi.size();
  require(p >= 1 && form.arma.theta.size() == p, "build_ssm: ARMA orders are inconsistent");
  if (form.has_u) {
    if (!(std::abs(form.u.theta_u) < 1.0)) fail(ErrorKind::numerical, "build_ssm: |theta_u| must be < 1");
    if (!(form.u.sigma_xi2 >= 0.0)) fail(ErrorKind::numerical, "build_ssm: sigma_xi2 must be >= 0");
  }
  const Eigen::Index r = static_cast<Eigen::Index>(p + 1);
  const Eigen::Index n = r + (form.has_u ? 2 : 0);
  SsmSpec s;
  s.transition = MatrixXd::Zero(n, n);
  s.state_cov = MatrixXd::Zero(n, n);
  s.state_intercept = VectorXd::Zero(n);
  s.loading = Eigen::RowVectorXd::Zero(n);
  for (std::size_t i = 0; i < p; ++i) s.transition(static_cast<Eigen::Index>(i), 0) = form.arma.phi[i];
  for (Eigen::Index i = 0; i + 1 < r; ++i) s.transition(i, i + 1) = 1.0;
  VectorXd R = VectorXd::Zero(r);
  R[0] = 1.0;
  for (std::size_t i = 0; i < p; ++i) R[static_cast<Eigen::Index>(i + 1)] = form.arma.theta[i];
  s.state_cov.topLeftCorner(r, r) = form.arma.sigma_eta2 * R * R.transpose();
  s.loading[0] = 1.0;
  if (spectral_radius(s.transition.topLeftCorner(r, r)) >= 1.0)
    fail(ErrorKind::numerical, "build_ssm: IV AR part is not stationary");
  s.obs_intercept = form.sigma2;
  if (form.has_u) {
    s.transition(r, r + 1) = 1.0;
    Eigen::Vector2d Ru(1.0, form.u.theta_u);
    s.state_cov.block(r, r, 2, 2) = form.u.sigma_xi2 * Ru * Ru.transpose();
    s.loading[r] = 1.0;
    s.obs_intercept += form.u.c_u;
  }
  s.obs_var = form.sigma_d2;
  return s;
}

SsmSpec build_ssm(const ModelSpec& spec, const ModelParams& params) { return build_ssm(ssm_form(spec, params)); }

// ---------------------------------------------------------------------------
// Identification from intraday returns

Identification identify(std::span<const double> returns, std::size_t m, std::span<const double> ncrv,
                        std::optional<std::size_t> q, std::size_t max_lag, double level) {
  if (max_lag == 0) max_lag = std::min<std::size_t>(m - 1, 40);
  if (q) max_lag = std::max(max_lag, std::min(m - 1, *q + 2));
  Identification id;
  try {
    id.acov = sample_autocov(returns, m, max_lag);
  } catch (const Error& e) {
    fail(e.kind(), std::string("identification step 1 (return autocovariance): ") + e.what());
  }
  if (q) {
    id.q = *q;
  } else {
    try {
      id.selection = select_q(id.acov, level);
    } catch (const Error& e) {
      fail(e.kind(), std::string("identification step 1 (select q): ") + e.what());
    }
    id.q = id.selection->q;
  }
  if (id.acov.g.size() < id.q + 2)
    fail(ErrorKind::identification, "identification step 1: max_lag too small for q");
  try {
    id.sigma2 = sigma2_from_returns(id.acov, id.q);
    id.e_u = expected_u_from_data(ncrv, id.sigma2);
    id.omega = omega_from_g(id.acov, id.q);
  } catch (const Error& e) {
    fail(e.kind(), std::string("identification step 2: ") + e.what());
  }
  return id;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

struct StartGuess {
  std::vector<double> omega2, lambda;
};

StartGuess factor_start(std::span<const double> y, std::size_t p) {
  std::vector<double> v(y.begin(), y.end());
  double mu = mean(v);
  auto acov = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = k; t < v.size(); ++t) s += (v[t] - mu) * (v[t - k] - mu);
    return s / static_cast<double>(v.size());
  };
  double g1 = acov(1), g2 = acov(2);
  double lam = 0.05;
  if (g1 > 0.0 && g2 > 0.0 && g2 < g1) lam = -std::log(g2 / g1);
  lam = std::clamp(lam, 0.005, 1.0);
  double a = -std::expm1(-lam);
  double w = g1 > 0.0 ? g1 * lam * lam / (a * a) : 0.0;
  w = std::max(w, 1e-3 * mu * mu + 1e-12);
  StartGuess s;
  if (p == 1) {
    s.omega2 = {w};
    s.lambda = {lam};
  } else {
    for (std::size_t i = 0; i < p; ++i) {
      s.omega2.push_back(w / static_cast<double>(p));
      s.lambda.push_back(lam * std::pow(8.0, static_cast<double>(i)) * (i == 0 ? 0.5 : 1.0));
    }
  }
  return s;
}

// Parameter layout shared by the objective and the reporting transform.
struct Layout {
  ModelSpec spec;
  std::size_t k = 0;
  std::size_t i_sigma2 = npos, i_omega = npos, i_lambda = npos, i_seps = npos, i_oeps = npos, i_f = npos;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit Layout(const ModelSpec& s) : spec(s) {
    if (s.kind == ModelKind::BSM || s.kind == ModelKind::NW) i_sigma2 = k++;
    i_omega = k;
    k += s.p;
    i_lambda = k;
    k += s.p;
    if (s.kind == ModelKind::NW) {
      i_seps = k++;
      i_oeps = k++;
    }
    if (s.kind == ModelKind::WeakF && !s.fixed_f) i_f = k++;
  }
};

// Everything fixed by identification that the weak-f objective needs.
struct Pinned {
  double sigma2 = 0.0;
  double e_u = 0.0;
  double g0 = 0.0;
  std::vector<double> omega;  // zero-f Omega (Omega_0 includes sigma_delta^2)
  std::size_t m = 0;
};

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Model {
  Layout L;
  Pinned pin;

  // Natural parameters from optimizer coordinates.
  VectorXd natural(const VectorXd& x) const {
    VectorXd v(x.size());
    const std::size_t p = L.spec.p;
    if (L.i_sigma2 != Layout::npos) v[idx(L.i_sigma2)] = std::exp(x[idx(L.i_sigma2)]);
    for (std::size_t i = 0; i < p; ++i) v[idx(L.i_omega + i)] = std::exp(x[idx(L.i_omega + i)]);
    double lam = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      lam += std::exp(x[idx(L.i_lambda + i)]);
      v[idx(L.i_lambda + i)] = lam;
    }
    if (L.i_seps != Layout::npos) {
      v[idx(L.i_seps)] = std::exp(x[idx(L.i_seps)]);
      v[idx(L.i_oeps)] = std::exp(x[idx(L.i_oeps)]);
    }
    if (L.i_f != Layout::npos) {
      auto iv = interval_for(v);
      v[idx(L.i_f)] = iv.lo + (iv.hi - iv.lo) * logistic(x[idx(L.i_f)]);
    }
    return v;
  }

  VectorXd raw(const VectorXd& v) const {
    VectorXd x(v.size());
    const std::size_t p = L.spec.p;
    auto lg = [](double a) {
      if (!(a > 0.0)) fail(ErrorKind::invalid_argument, "start value must be positive");
      return std::log(a);
    };
    if (L.i_sigma2 != Layout::npos) x[idx(L.i_sigma2)] = lg(v[idx(L.i_sigma2)]);
    for (std::size_t i = 0; i < p; ++i) x[idx(L.i_omega + i)] = lg(v[idx(L.i_omega + i)]);
    double prev = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      double lam = v[idx(L.i_lambda + i)];
      x[idx(L.i_lambda + i)] = lg(lam - prev);
      prev = lam;
    }
    if (L.i_seps != Layout::npos) {
      x[idx(L.i_seps)] = lg(v[idx(L.i_seps)]);
      x[idx(L.i_oeps)] = lg(v[idx(L.i_oeps)]);
    }
    if (L.i_f != Layout::npos) {
      auto iv = interval_for(v);
      double s = (v[idx(L.i_f)] - iv.lo) / (iv.hi - iv.lo);
      s = std::clamp(s, 1e-6, 1.0 - 1e-6);
      x[idx(L.i_f)] = std::log(s / (1.0 - s));
    }
    return x;
  }

  SrSarvParams sr(const VectorXd& v) const {
    SrSarvParams s;
    s.sigma2 = L.i_sigma2 != Layout::npos ? v[idx(L.i_sigma2)] : pin.sigma2;
    for (std::size_t i = 0; i < L.spec.p; ++i) {
      s.omega2.push_back(v[idx(L.i_omega + i)]);
      s.lambda.push_back(v[idx(L.i_lambda + i)]);
    }
    return s;
  }

  Interval interval_for(const VectorXd& v) const {
    auto s = sr(v);
    double es = expected_sigma_quiet(s);
    double w1 = pin.omega.size() > 1 ? pin.omega[1] : 0.0;
    return f_constraint_interval(pin.g0, w1, pin.sigma2, pin.m, es);
  }

  static double expected_sigma_quiet(const SrSarvParams& s) {
    double sd = std::sqrt(s.sigma2);
    return sd - s.sum_omega2() / (8.0 * sd * s.sigma2);
  }

  double f_value(const VectorXd& v) const {
    if (L.spec.kind != ModelKind::WeakF) return 0.0;
    return L.i_f != Layout::npos ? v[idx(L.i_f)] : *L.spec.fixed_f;
  }

  // Assemble the complete fitted state from natural parameters.
  void assemble(const VectorXd& v, FittedModel& fm) const {
    fm.params = ModelParams{};
    fm.params.sr = sr(v);
    fm.f_m = 0.0;
    fm.e_sigma = expected_sigma_quiet(fm.params.sr);
    fm.omega.clear();
    fm.u_moments = {};
    fm.f_interval.reset();
    switch (L.spec.kind) {
      case ModelKind::BSM: break;
      case ModelKind::NW: {
        fm.params.sigma_eps2 = v[idx(L.i_seps)];
        fm.params.omega_eps2 = v[idx(L.i_oeps)];
        auto nw = nw_u_moments(fm.params.sr.sigma2, fm.params.sigma_eps2, fm.params.omega_eps2,
                               static_cast<double>(L.spec.m));
        fm.u_moments = nw.u;
        break;
      }
      case ModelKind::ZeroF: {
        UMomentInputs in;
        in.sigma2 = pin.sigma2;
        in.omega = pin.omega;
        in.m = pin.m;
        fm.omega = pin.omega;
        fm.u_moments = u_moments(in, UMode::exact_f0);
        fm.u_moments.mean = pin.e_u;
        fm.params.u = ma1_from_moments(fm.u_moments);
        break;
      }
      case ModelKind::WeakF: {
        const double f = f_value(v);
        fm.f_m = f;
        fm.f_interval = f_constraint_interval(pin.g0, pin.omega.size() > 1 ? pin.omega[1] : 0.0, pin.sigma2,
                                              pin.m, fm.e_sigma);
        if (!fm.f_interval->contains(f)) fail(ErrorKind::constraint, "weak-f: f(m) outside constraint (res_f)");
        UMomentInputs in;
        in.sigma2 = pin.sigma2;
        in.omega = pin.omega;
        in.omega[0] = omega0_weak_f(pin.g0, pin.sigma2, in.omega.size() > 1 ? in.omega[1] : 0.0, pin.m, f,
                                    fm.e_sigma);
        in.f_m = f;
        in.e_sigma = fm.e_sigma;
        in.m = pin.m;
        fm.omega = in.omega;
        fm.u_moments = u_moments(in, UMode::weak_f);
        fm.u_moments.mean = pin.e_u;
        fm.params.u = ma1_from_moments(fm.u_moments);
        break;
      }
    }
    fm.form = ssm_form(L.spec, fm.params);
    fm.ssm = build_ssm(fm.form);
  }

  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
};

VectorXd default_start(const Model& M, std::span<const double> ncrv) {
  const auto& L = M.L;
  VectorXd v(static_cast<Eigen::Index>(L.k));
  auto fs = factor_start(ncrv, L.spec.p);
  const double mu = mean(ncrv);
  if (L.i_sigma2 != Layout::npos) v[Model::idx(L.i_sigma2)] = L.spec.kind == ModelKind::NW ? 0.5 * mu : mu;
  for (std::size_t i = 0; i < L.spec.p; ++i) {
    v[Model::idx(L.i_omega + i)] = fs.omega2[i];
    v[Model::idx(L.i_lambda + i)] = fs.lambda[i];
  }
  if (L.i_seps != Layout::npos) {
    // Neutral split: half of the mean NCRV attributed to noise.
    double se = std::max(0.5 * mu / (2.0 * static_cast<double>(L.spec.m)), 1e-12);
    v[Model::idx(L.i_seps)] = se;
    v[Model::idx(L.i_oeps)] = 2.0 * se * se;
  }
  if (L.i_f != Layout::npos) {
    double f = 0.0;
    try {
      auto iv = M.interval_for(v);
      if (!(iv.lo < 0.0 && iv.hi > 0.0)) f = 0.5 * (iv.lo + iv.hi);
    } catch (const Error&) {
    }
    v[Model::idx(L.i_f)] = f;
  }
  return v;
}

}  // namespace

FittedModel fit_model(const ModelSpec& spec, std::span<const double> ncrv, std::span<const double> returns,
                      const FitOptions& options) {
  require(spec.m >= 2, "fit: m must be >= 2");
  require(spec.p >= 1 && spec.p <= 4, "fit: p must be between 1 and 4");
  require(ncrv.size() >= 10, "fit: need at least 10 days");
  for (double y : ncrv) require(std::isfinite(y), "fit: NCRV must be finite");
  if (spec.kind == ModelKind::WeakF && spec.fixed_f)
    require(std::isfinite(*spec.fixed_f), "fit: fixed f must be finite");

  Model M{Layout(spec), {}};
  FittedModel fm;
  fm.spec = spec;
  if (spec.kind == ModelKind::ZeroF || spec.kind == ModelKind::WeakF) {
    require(returns.size() == ncrv.size() * spec.m, "fit: returns must hold m returns for every NCRV day");
    fm.ident = identify(returns, spec.m, ncrv, spec.q, spec.max_lag, spec.level);
    M.pin.sigma2 = fm.ident->sigma2;
    M.pin.e_u = fm.ident->e_u;
    M.pin.g0 = fm.ident->acov.g[0];
    M.pin.omega = fm.ident->omega.omega;
    M.pin.m = spec.m;
    if (spec.kind == ModelKind::WeakF) {
      // Fails early when no f(m) is admissible even at omega^2 = 0.
      double sd = std::sqrt(M.pin.sigma2);
      try {
        (void)f_constraint_interval(M.pin.g0, M.pin.omega.size() > 1 ? M.pin.omega[1] : 0.0, M.pin.sigma2,
                                    spec.m, sd);
      } catch (const Error& e) {
        fail(e.kind(), std::string("weak-f step 1: ") + e.what());
      }
    }
  }

  std::vector<double> y(ncrv.begin(), ncrv.end());
  QmleProblem prob;
  prob.names = spec.free_params();
  prob.to_natural = [&M](const VectorXd& x) { return M.natural(x); };
  prob.from_natural = [&M](const VectorXd& v) { return M.raw(v); };
  prob.loglik = [&M, &y](const VectorXd& x) {
    FittedModel tmp;
    tmp.spec = M.L.spec;
    try {
      M.assemble(M.natural(x), tmp);
      return kalman_loglik(tmp.ssm, y);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  VectorXd start;
  if (options.warm_start) {
    require(options.warm_start->size() == M.L.k, "fit: warm start has the wrong number of parameters");
    start = Eigen::Map<const VectorXd>(options.warm_start->data(), static_cast<Eigen::Index>(M.L.k));
  } else {
    start = default_start(M, y);
  }
  try {
    fm.fit = qmle_maximize(prob, start, options.qmle);
  } catch (const Error& e) {
    fail(e.kind(), std::string("fit step QMLE: ") + e.what());
  }
  M.assemble(fm.fit.params, fm);
  return fm;
}

FittedModel fit_model(const ModelSpec& spec, const IntradayPanel& panel, const FitOptions& options) {
  auto ncrv = compute_series(panel, MeasureKind::NCRV, spec.m);
  std::vector<double> r;
  if (spec.kind == ModelKind::ZeroF || spec.kind == ModelKind::WeakF) r = panel.pooled_returns(spec.m, true);
  return fit_model(spec, ncrv.values, r, options);
}

FittedModel refit_at(const FittedModel& base, const std::vector<double>& natural) {
  Model M{Layout(base.spec), {}};
  require(natural.size() == M.L.k, "refit: wrong number of parameters");
  if (base.ident) {
    M.pin.sigma2 = base.ident->sigma2;
    M.pin.e_u = base.ident->e_u;
    M.pin.g0 = base.ident->acov.g[0];
    M.pin.omega = base.ident->omega.omega;
    M.pin.m = base.spec.m;
  }
  FittedModel fm = base;
  M.assemble(Eigen::Map<const VectorXd>(natural.data(), static_cast<Eigen::Index>(natural.size())), fm);
  return fm;
}

IvEstimates estimate_iv(const FittedModel& model, std::span<const double> ncrv) {
  auto out = kalman_filter(model.ssm, ncrv);
  const std::size_t N = ncrv.size();
  const Eigen::Index ui = static_cast<Eigen::Index>(model.form.arma.phi.size() + 1);
  IvEstimates e;
  e.smoothed_iv.resize(N);
  e.smoothed_u.resize(N);
  e.predicted_iv.resize(N);
  for (std::size_t t = 0; t < N; ++t) {
    e.smoothed_iv[t] = model.form.sigma2 + out.smoothed_mean[t][0];
    e.smoothed_u[t] = model.form.has_u ? model.form.u.c_u + out.smoothed_mean[t][ui] : 0.0;
    e.predicted_iv[t] = model.form.sigma2 + out.predicted_mean[t][0];
  }
  e.next_iv = model.form.sigma2 + out.next_mean[0];
  return e;
}

}  // namespace mnrv
