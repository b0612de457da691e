#include "cli/encode.hpp"

#include <cmath>

#include "mnrv/codec.hpp"

namespace mnrv {

using nlohmann::json;

namespace {

// JSON has no NaN or infinity; they are written as null.
json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void to_json(json& j, const EvalReport& r) {
  j = json{{"n", r.n},          {"skipped", r.skipped},     {"mse", finite(r.mse)},
           {"qlike", finite(r.qlike)}, {"mz_a", finite(r.mz_a)}, {"mz_se_a", finite(r.mz_se_a)},
           {"mz_b", finite(r.mz_b)},   {"mz_se_b", finite(r.mz_se_b)}, {"mz_r2", finite(r.mz_r2)},
           {"mz_adj_r2", finite(r.mz_adj_r2)}};
}

void from_json(const json& j, EvalReport& r) {
  auto get = [&](const char* k) {
    const json& v = j.at(k);
    return v.is_null() ? std::nan("") : v.get<double>();
  };
  r.n = j.at("n").get<std::size_t>();
  r.skipped = j.value("skipped", std::size_t{0});
  r.mse = get("mse");
  r.qlike = get("qlike");
  r.mz_a = get("mz_a");
  r.mz_se_a = get("mz_se_a");
  r.mz_b = get("mz_b");
  r.mz_se_b = get("mz_se_b");
  r.mz_r2 = get("mz_r2");
  r.mz_adj_r2 = get("mz_adj_r2");
}

void to_json(json& j, const IvArma& a) {
  j = json{{"p", a.p}, {"c_iv", a.c_iv}, {"phi", a.phi}, {"theta", a.theta}, {"sigma_eta2", a.sigma_eta2}};
}

void to_json(json& j, const Ma1Params& u) {
  j = json{{"c_u", u.c_u}, {"theta_u", u.theta_u}, {"sigma_xi2", u.sigma_xi2}};
}

void to_json(json& j, const UMoments& u) {
  j = json{{"mean", u.mean}, {"variance", u.variance}, {"lag1", u.lag1}, {"higher", u.higher}};
}

void to_json(json& j, const ReturnAcov& a) {
  j = json{{"m", a.m}, {"n_obs", a.n_obs}, {"g", a.g}, {"se", a.se}, {"degenerate", a.degenerate}};
}

void to_json(json& j, const QSelection& q) {
  j = json{{"q", q.q},           {"run_start", q.run_start}, {"critical", q.critical},
           {"ljung_box", {{"lags", q.lb_lags}, {"stat", q.lb_stat}, {"pvalue", q.lb_pvalue}, {"reject", q.lb_reject}}}};
}

void to_json(json& j, const Identification& id) {
  j = json{{"q", id.q},
           {"sigma2", id.sigma2},
           {"e_u", id.e_u},
           {"omega", id.omega.omega},
           {"omega0_plus_delta", id.omega.omega0_plus_delta},
           {"acov", id.acov}};
  if (id.selection) j["q_selection"] = *id.selection;
}

void to_json(json& j, const FitResult& f) {
  json params = json::object();
  for (std::size_t i = 0; i < f.names.size(); ++i) params[f.names[i]] = f.params[static_cast<Eigen::Index>(i)];
  json starts = json::array();
  for (const auto& s : f.starts) {
    json sp = json::object();
    for (std::size_t i = 0; i < f.names.size() && static_cast<Eigen::Index>(i) < s.natural.size(); ++i)
      sp[f.names[i]] = finite(s.natural[static_cast<Eigen::Index>(i)]);
    starts.push_back({{"index", s.index},
                      {"ok", s.ok},
                      {"converged", s.converged},
                      {"loglik", finite(s.loglik)},
                      {"grad_norm", finite(s.grad_norm)},
                      {"n_iter", s.n_iter},
                      {"message", s.message},
                      {"params", sp}});
  }
  j = json{{"params", params},       {"loglik", f.loglik},         {"converged", f.converged},
           {"n_iter", f.n_iter},     {"start_index", f.start_index}, {"grad_norm", finite(f.grad_norm)},
           {"starts", starts}};
}

void to_json(json& j, const FittedModel& f) {
  json spec = {{"kind", to_string(f.spec.kind)}, {"p", f.spec.p}, {"m", f.spec.m}};
  if (f.spec.q) spec["q"] = *f.spec.q;
  if (f.spec.fixed_f) spec["fixed_f"] = *f.spec.fixed_f;
  json params = {{"sr", f.params.sr}};
  if (f.spec.kind == ModelKind::NW) {
    params["sigma_eps2"] = f.params.sigma_eps2;
    params["omega_eps2"] = f.params.omega_eps2;
  }
  if (f.spec.kind == ModelKind::ZeroF || f.spec.kind == ModelKind::WeakF) {
    params["omega"] = f.omega;
    params["f_m"] = f.f_m;
    params["e_sigma"] = f.e_sigma;
  }
  json form = {{"arma", f.form.arma},
               {"sigma2", f.form.sigma2},
               {"sigma_d2", f.form.sigma_d2},
               {"constant_iv", f.form.constant_iv}};
  if (f.form.has_u) form["u"] = f.form.u;
  j = json{{"spec", spec},
           {"free_params", f.spec.free_params()},
           {"fixed_params", f.spec.fixed_params()},
           {"params", params},
           {"ssm_form", form},
           {"fit", f.fit}};
  if (f.form.has_u) j["u_moments"] = f.u_moments;
  if (f.ident) j["identification"] = *f.ident;
  if (f.f_interval) j["f_interval"] = {f.f_interval->lo, f.f_interval->hi};
}

void to_json(json& j, const DayVerdict& d) {
  j = json{{"day", d.day},
           {"label", d.label},
           {"kept", d.kept},
           {"reasons", d.reasons},
           {"missing", d.missing},
           {"zero_returns", d.zero_returns},
           {"longest_flat_minutes", d.longest_flat_minutes}};
}

void to_json(json& j, const FilterReport& r) {
  j = json{{"kept", r.kept()}, {"excluded", r.excluded()}, {"days", r.days}};
}

}  // namespace mnrv
