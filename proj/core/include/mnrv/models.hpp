#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mnrv/market_sim.hpp"
#include "mnrv/noise_moments.hpp"
#include "mnrv/qmle.hpp"
#include "mnrv/return_moments.hpp"
#include "mnrv/state_space.hpp"

namespace mnrv {

enum class ModelKind { BSM, NW, ZeroF, WeakF };

const char* to_string(ModelKind k);
ModelKind model_from_string(const std::string& s);  // bsm | nw | zerof | weakf

struct IvArma {
  std::size_t p = 1;
  double c_iv = 0.0;
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma_eta2 = 0.0;
};

struct IvArmaMap {
  IvArma arma;
  double sigma_d2 = 0.0;
  bool constant_iv = false;
};

// Autocovariance of daily IV implied by the factor model.
double iv_autocov(const SrSarvParams& sr, std::size_t n);
// Autocovariances 0..max_lag of an ARMA(p,q) with the given coefficients.
std::vector<double> arma_autocov(const std::vector<double>& phi, const std::vector<double>& theta,
                                 double sigma2, std::size_t max_lag);
IvArmaMap iv_arma_map(const SrSarvParams& sr, double m);
double discretization_variance(const SrSarvParams& sr, double m);  // sigma_d^2

struct ModelSpec {
  ModelKind kind = ModelKind::ZeroF;
  std::size_t p = 1;
  std::size_t m = 0;
  std::optional<std::size_t> q;  // noise MA order, selected from the data when empty
  std::size_t max_lag = 0;       // 0 picks min(m-1, 40)
  double level = 0.01;
  std::optional<double> fixed_f;  // weak-f only: pin f(m) instead of estimating it

  std::vector<std::string> free_params() const;
  std::vector<std::string> fixed_params() const;
};

struct ModelParams {
  SrSarvParams sr;
  double sigma_eps2 = 0.0;  // NW
  double omega_eps2 = 0.0;  // NW
  Ma1Params u;              // zero-f / weak-f, pinned by identification
};

struct SsmForm {
  IvArma arma;
  double sigma2 = 0.0;
  double sigma_d2 = 0.0;
  bool has_u = false;
  Ma1Params u;
  bool constant_iv = false;
};

SsmForm ssm_form(const ModelSpec& spec, const ModelParams& params);
SsmSpec build_ssm(const SsmForm& form);
SsmSpec build_ssm(const ModelSpec& spec, const ModelParams& params);

struct Identification {
  ReturnAcov acov;
  std::optional<QSelection> selection;
  std::size_t q = 0;
  double sigma2 = 0.0;
  double e_u = 0.0;
  NoiseAcov omega;  // zero-f closing equation
};

// Steps shared by the zero-f and weak-f procedures: autocovariances, q, sigma^2, E[u], Omega.
Identification identify(std::span<const double> returns, std::size_t m, std::span<const double> ncrv,
                        std::optional<std::size_t> q = std::nullopt, std::size_t max_lag = 0,
                        double level = 0.01);

struct FitOptions {
  QmleOptions qmle;
  std::optional<std::vector<double>> warm_start;  // natural units, in free_params() order
};

struct FittedModel {
  ModelSpec spec;
  ModelParams params;
  SsmForm form;
  SsmSpec ssm;
  FitResult fit;
  std::optional<Identification> ident;
  std::vector<double> omega;  // Omega_0..Omega_q used in the u block
  double f_m = 0.0;
  double e_sigma = 0.0;
  UMoments u_moments;
  std::optional<Interval> f_interval;
};

// `returns` are the pooled intraday returns at frequency spec.m of the same days as `ncrv`.
FittedModel fit_model(const ModelSpec& spec, std::span<const double> ncrv, std::span<const double> returns,
                      const FitOptions& options = {});
FittedModel fit_model(const ModelSpec& spec, const IntradayPanel& panel, const FitOptions& options = {});

// Rebuild the fitted model from natural parameters of the free set (the identification is reused).
FittedModel refit_at(const FittedModel& base, const std::vector<double>& natural);

struct IvEstimates {
  std::vector<double> smoothed_iv;
  std::vector<double> smoothed_u;
  std::vector<double> predicted_iv;  // one step ahead, from information up to t-1
  double next_iv = 0.0;              // forecast of the day after the sample
};

IvEstimates estimate_iv(const FittedModel& model, std::span<const double> ncrv);

}  // namespace mnrv
