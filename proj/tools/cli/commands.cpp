#include "cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli/encode.hpp"
#include "cli/svg.hpp"
#include "mnrv/codec.hpp"
#include "mnrv/data_io.hpp"
#include "mnrv/error.hpp"
#include "mnrv/evaluation.hpp"
#include "mnrv/models.hpp"
#include "mnrv/noise_moments.hpp"
#include "mnrv/panel_io.hpp"
#include "mnrv/realized.hpp"
#include "mnrv/return_moments.hpp"

namespace mnrv::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw UsageError("bad " + what + " '" + s + "'");
  return v;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const json& j, Context& ctx) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
  f.close();
  ctx.manifest->add_output(p);
}

IntradayPanel load(const std::string& path, Context& ctx) {
  IntradayPanel panel = load_panel(path);
  ctx.manifest->add_input(path);
  ctx.manifest->add_input(sidecar_path(path));
  return panel;
}

std::size_t pick_m(std::size_t m, const IntradayPanel& panel) { return m == 0 ? panel.m : m; }

std::string model_label(ModelKind k, std::size_t p) {
  const char* base = k == ModelKind::BSM ? "BSM" : k == ModelKind::NW ? "NW" : k == ModelKind::ZeroF ? "zero-f" : "weak-f";
  return std::string(base) + "(" + std::to_string(p) + ")";
}

ModelSpec make_spec(ModelKind kind, std::size_t m, const ModelOpts& o) {
  ModelSpec s;
  s.kind = kind;
  s.p = o.p;
  s.m = m;
  if (o.q != "auto") s.q = parse_number<std::size_t>(o.q, "--q");
  s.max_lag = o.max_lag;
  s.level = o.level;
  s.fixed_f = o.fix_f;
  return s;
}

FitOptions make_fit_options(const ModelOpts& o, const Context& ctx) {
  FitOptions f;
  f.qmle.starts = o.starts;
  if (ctx.seed) f.qmle.seed = *ctx.seed;
  f.qmle.jobs = ctx.jobs;
  f.qmle.trace = !ctx.trace.empty();
  return f;
}

void write_trace(const std::string& path, const std::string& label, const FitResult& fit, Context& ctx) {
  if (path.empty()) return;
  fs::path p = ctx.out_dir / path;
  bool fresh = std::find(ctx.manifest->outputs().begin(), ctx.manifest->outputs().end(), p) ==
               ctx.manifest->outputs().end();
  std::ofstream f(p, fresh ? std::ios::binary : std::ios::binary | std::ios::app);
  if (!f) fail(ErrorKind::io, "cannot write " + p.string());
  if (fresh) f << "model,start,stage,iter,loglik\n";
  for (const auto& r : fit.trace)
    f << label << ',' << r.start << ',' << r.stage << ',' << r.iter << ',' << fmt(r.loglik) << '\n';
  f.close();
  if (fresh) ctx.manifest->add_output(p);
}

std::vector<double> parse_psi(const std::string& s) {
  std::vector<double> out;
  if (s == "none") return out;
  for (const auto& item : split(s)) out.push_back(parse_number<double>(item, "--psi entry"));
  return out;
}

const IntradayPanel& require_truth(const IntradayPanel& panel) {
  if (panel.iv_true.empty())
    throw UsageError("this subcommand scores against the true IV, which the panel does not carry");
  return panel;
}

}  // namespace

GeneratorOpts::GeneratorOpts() {
  HestonParams h = reference_heston();
  NoiseParams n = NoiseParams::reference();
  kappa = h.kappa;
  sigma2 = h.sigma2;
  gamma = h.gamma;
  rho = h.rho;
  f = n.f_coef;
  alpha = n.alpha;
  sigma_zeta = n.sigma_zeta;
  sigma_delta = n.sigma_delta;
  delta_kurtosis = n.delta_kurtosis;
  psi.clear();
  for (std::size_t i = 0; i < n.psi.size(); ++i) psi += (i ? "," : "") + fmt(n.psi[i]);
}

void GeneratorOpts::add_to(CLI::App& app) {
  auto num = [&](const char* name, double& v, const char* desc) { app.add_option(name, v, desc)->default_str(fmt(v)); };
  num("--kappa", kappa, "Variance mean reversion per day");
  num("--sigma2", sigma2, "Long-run variance");
  num("--gamma", gamma, "Volatility of variance");
  num("--rho", rho, "Leverage correlation");
  num("--f", f, "Scale of the return-correlated noise");
  num("--alpha", alpha, "Shrink exponent of f(m)");
  app.add_option("--psi", psi, "Comma-separated MA weights of the noise, or none");
  num("--sigma-zeta", sigma_zeta, "Innovation std of the MA noise");
  num("--sigma-delta", sigma_delta, "Std of the IID noise");
  num("--delta-kurtosis", delta_kurtosis, "Kurtosis of the IID noise");
  app.add_flag("--no-noise", no_noise, "Noise-free prices");
}

HestonParams GeneratorOpts::heston() const { return {kappa, sigma2, gamma, rho}; }

NoiseParams GeneratorOpts::noise() const {
  if (no_noise) return NoiseParams::none();
  NoiseParams n;
  n.f_coef = f;
  n.alpha = alpha;
  n.psi = parse_psi(psi);
  n.sigma_zeta = sigma_zeta;
  n.sigma_delta = sigma_delta;
  n.delta_kurtosis = delta_kurtosis;
  return n;
}

void ModelOpts::add_to(CLI::App& app) {
  app.add_option("--p", p, "Number of volatility factors")->check(CLI::Range(1, 2));
  app.add_option("--q", q, "Noise MA order or auto");
  app.add_option("--max-lag", max_lag, "Autocovariance lags for the order selection (0: min(m-1, 40))");
  app.add_option("--level", level, "Significance level of the order selection");
  app.add_option("--starts", starts, "QMLE starting points")->check(CLI::PositiveNumber);
  app.add_option("--fix-f", fix_f, "Pin f(m) in the weak-f model");
}

void run_simulate(const SimulateOpts& o, Context& ctx) {
  if (!ctx.seed) throw UsageError("simulate needs a seed: --seed, \"seed\" in the config, or MNRV_SEED");
  SimOptions so;
  so.n_days = o.days;
  so.m = o.m;
  so.sub_steps = o.sub_steps;
  so.seed = *ctx.seed;
  so.store_sigma2_path = o.store_sigma2;
  so.stationary_start = !o.fixed_start;
  IntradayPanel panel = simulate_panel(o.gen.heston(), o.gen.noise(), so);
  fs::path csv = ctx.out_dir / o.output;
  save_panel(panel, csv);
  ctx.manifest->add_output(csv);
  ctx.manifest->add_output(sidecar_path(csv));
  *ctx.out << "simulated " << panel.n_days << " days x " << panel.m << " -> " << csv.generic_string() << '\n';
}

void run_ingest(const IngestOpts& o, Context& ctx) {
  RawTickFile raw = read_ticks(fs::path(o.input));
  ctx.manifest->add_input(o.input);
  raw.tz_offset_seconds = parse_tz_offset(o.tz);
  ResampleOptions ro;
  ro.scale = o.scale;
  ro.day_seconds = o.day_seconds;
  IntradayPanel panel = resample(raw, o.m, ro);
  CleaningRule rule;
  rule.max_missing = o.max_missing;
  rule.max_zero_returns = o.max_zero_returns;
  rule.max_flat_minutes = o.max_flat_minutes;
  rule.day_seconds = o.day_seconds;
  FilterResult fr = filter_days(panel, rule);
  if (!o.no_filter) panel = std::move(fr.panel);
  if (panel.n_days == 0) fail(ErrorKind::invalid_argument, "every day was excluded by the cleaning rules");
  fs::path csv = ctx.out_dir / o.output;
  save_panel(panel, csv);
  ctx.manifest->add_output(csv);
  ctx.manifest->add_output(sidecar_path(csv));
  json rep = fr.report;
  rep["applied"] = !o.no_filter;
  rep["rule"] = {{"max_missing", rule.max_missing},
                 {"max_zero_returns", rule.max_zero_returns},
                 {"max_flat_minutes", rule.max_flat_minutes}};
  write_json(ctx.out_dir / "exclusions.json", rep, ctx);
  *ctx.out << "ingested " << fr.report.days.size() << " days, excluded " << fr.report.excluded() << '\n';
}

void run_measures(const MeasuresOpts& o, Context& ctx) {
  IntradayPanel panel = load(o.data, ctx);
  std::size_t m = pick_m(o.m, panel);
  MeasureKind kind = measure_from_string(o.kind);
  BandwidthSpec bw = BandwidthSpec::parse(o.bandwidth);
  bw.rq_m = o.rq_m;
  RealizedSeries s = compute_series(panel, kind, m, bw, o.lag);
  std::string name = o.output.empty() ? std::string(to_string(kind)) + "_" + std::to_string(m) + ".csv" : o.output;
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  fs::path p = ctx.out_dir / name;
  auto f = open_out(p);
  f << "day,label,value" << (s.bandwidth.empty() ? "" : ",bandwidth") << '\n';
  for (std::size_t d = 0; d < s.values.size(); ++d) {
    f << d << ',' << (panel.day_labels.empty() ? std::to_string(d) : panel.day_labels[d]) << ',' << fmt(s.values[d]);
    if (!s.bandwidth.empty()) f << ',' << fmt(s.bandwidth[d]);
    f << '\n';
  }
  f.close();
  ctx.manifest->add_output(p);
  if (s.negative_count > 0) warn(std::to_string(s.negative_count) + " negative realized kernel values (kept)");
  *ctx.out << to_string(kind) << " at m=" << m << " for " << s.values.size() << " days -> " << p.generic_string()
           << '\n';
}

void run_identify(const IdentifyOpts& o, Context& ctx) {
  IntradayPanel panel = load(o.data, ctx);
  std::size_t m = pick_m(o.m, panel);
  std::optional<std::size_t> q;
  if (o.q != "auto") q = parse_number<std::size_t>(o.q, "--q");
  auto returns = panel.pooled_returns(m);
  auto ncrv = compute_series(panel, MeasureKind::NCRV, m).values;
  Identification id = identify(returns, m, ncrv, q, o.max_lag, o.level);
  json j = id;
  j["m"] = m;
  j["n_days"] = panel.n_days;
  Omega0Forms forms = omega0_forms(id.acov.g, m, id.q, 0.0, 0.0);
  j["omega0_forms"] = {{"via_g1", forms.via_g1}, {"expanded", forms.expanded}};
  if (o.f != 0.0) {
    double es = o.e_sigma.value_or(std::sqrt(id.sigma2));
    json wf = {{"f_m", o.f}, {"e_sigma", es}};
    try {
      NoiseAcov w = omega_from_g(id.acov, id.q, o.f, es);
      wf["omega"] = w.omega;
      double om1 = id.q >= 1 ? w.omega[1] : 0.0;
      Interval iv = f_constraint_interval(id.acov.g[0], om1, id.sigma2, m, es);
      wf["f_interval"] = {iv.lo, iv.hi};
      wf["f_inside"] = iv.contains(o.f);
    } catch (const Error& e) {
      wf["error"] = e.what();
      warn(std::string("weak-f identification: ") + e.what());
    }
    j["weak_f"] = wf;
  }
  fs::path p = ctx.out_dir / o.output;
  write_json(p, j, ctx);
  *ctx.out << "q=" << id.q << " sigma2=" << id.sigma2 << " E[u]=" << id.e_u << " -> " << p.generic_string() << '\n';
}

void run_fit(const FitOpts& o, Context& ctx) {
  IntradayPanel panel = load(o.data, ctx);
  std::size_t m = pick_m(o.m, panel);
  ModelKind kind = model_from_string(o.model);
  ModelSpec spec = make_spec(kind, m, o.model_opts);
  FittedModel fm = fit_model(spec, panel, make_fit_options(o.model_opts, ctx));
  auto ncrv = compute_series(panel, MeasureKind::NCRV, m).values;
  IvEstimates est = estimate_iv(fm, ncrv);
  if (!fm.fit.converged) warn(model_label(kind, spec.p) + " fit did not converge");

  std::string stem = std::string(to_string(kind));
  json j = fm;
  j["next_iv"] = est.next_iv;
  write_json(ctx.out_dir / ("fit_" + stem + ".json"), j, ctx);

  fs::path table = ctx.out_dir / ("fit_" + stem + ".csv");
  {
    auto f = open_out(table);
    f << "name,value\n";
    const auto& sr = fm.params.sr;
    f << "sigma2," << fmt(sr.sigma2) << '\n';
    for (std::size_t i = 0; i < sr.p(); ++i) {
      f << "omega2_" << i + 1 << ',' << fmt(sr.omega2[i]) << '\n';
      f << "lambda_" << i + 1 << ',' << fmt(sr.lambda[i]) << '\n';
    }
    if (kind == ModelKind::NW) {
      f << "sigma_eps2," << fmt(fm.params.sigma_eps2) << '\n';
      f << "omega_eps2," << fmt(fm.params.omega_eps2) << '\n';
    }
    for (std::size_t i = 0; i < fm.omega.size(); ++i) f << "Omega_" << i << ',' << fmt(fm.omega[i]) << '\n';
    if (kind == ModelKind::WeakF) f << "f_m," << fmt(fm.f_m) << '\n';
    f << "logL," << fmt(fm.fit.loglik) << '\n';
    const auto& a = fm.form.arma;
    f << "c_iv," << fmt(a.c_iv) << '\n';
    for (std::size_t i = 0; i < a.phi.size(); ++i) f << "phi_" << i + 1 << ',' << fmt(a.phi[i]) << '\n';
    for (std::size_t i = 0; i < a.theta.size(); ++i) f << "theta_" << i + 1 << ',' << fmt(a.theta[i]) << '\n';
    f << "sigma_eta2," << fmt(a.sigma_eta2) << '\n';
    if (fm.form.has_u) {
      f << "c_u," << fmt(fm.form.u.c_u) << '\n';
      f << "theta_u," << fmt(fm.form.u.theta_u) << '\n';
      f << "sigma_xi2," << fmt(fm.form.u.sigma_xi2) << '\n';
    }
    f << "sigma_d2," << fmt(fm.form.sigma_d2) << '\n';
  }
  ctx.manifest->add_output(table);

  fs::path series = ctx.out_dir / ("estimates_" + stem + ".csv");
  {
    auto f = open_out(series);
    bool truth = !panel.iv_true.empty();
    f << "day,label,ncrv,smoothed_iv,smoothed_u,predicted_iv" << (truth ? ",iv_true" : "") << '\n';
    for (std::size_t d = 0; d < ncrv.size(); ++d) {
      f << d << ',' << (panel.day_labels.empty() ? std::to_string(d) : panel.day_labels[d]) << ',' << fmt(ncrv[d])
        << ',' << fmt(est.smoothed_iv[d]) << ',' << (est.smoothed_u.empty() ? "" : fmt(est.smoothed_u[d])) << ','
        << fmt(est.predicted_iv[d]);
      if (truth) f << ',' << fmt(panel.iv_true[d]);
      f << '\n';
    }
  }
  ctx.manifest->add_output(series);
  write_trace(ctx.trace, stem, fm.fit, ctx);
  *ctx.out << model_label(kind, spec.p) << " logL=" << fm.fit.loglik << (fm.fit.converged ? "" : " (not converged)")
           << '\n';
}

void run_evaluate(const EvaluateOpts& o, Context& ctx) {
  IntradayPanel panel = load(o.data, ctx);
  require_truth(panel);
  std::size_t m = pick_m(o.m, panel);
  const auto& target = panel.iv_true;
  std::vector<std::pair<std::string, std::vector<double>>> estimates;
  json columns = json::array();

  for (const auto& name : split(o.models)) {
    ModelKind kind = model_from_string(name);
    ModelSpec spec = make_spec(kind, m, o.model_opts);
    std::string label = model_label(kind, spec.p);
    try {
      FittedModel fm = fit_model(spec, panel, make_fit_options(o.model_opts, ctx));
      auto ncrv = compute_series(panel, MeasureKind::NCRV, m).values;
      IvEstimates est = estimate_iv(fm, ncrv);
      columns.push_back({{"label", label},
                         {"report", score(target, est.smoothed_iv)},
                         {"loglik", fm.fit.loglik},
                         {"converged", fm.fit.converged}});
      estimates.emplace_back(label, std::move(est.smoothed_iv));
      write_trace(ctx.trace, to_string(kind), fm.fit, ctx);
    } catch (const Error& e) {
      warn(label + ": " + e.what());
      columns.push_back({{"label", label}, {"error", e.what()}});
    }
  }
  for (const auto& name : split(o.measures)) {
    std::string label;
    RealizedSeries s;
    if (name == "ncrv") {
      label = "NCRV";
      s = compute_series(panel, MeasureKind::NCRV, m);
    } else if (name == "rk" || name == "rk-oracle") {
      label = name == "rk" ? "RK" : "RK (true H)";
      BandwidthSpec bw;
      bw.mode = name == "rk" ? BandwidthSpec::Mode::rough : BandwidthSpec::Mode::oracle;
      s = compute_series(panel, MeasureKind::RK, m, bw);
    } else {
      throw UsageError("unknown measure '" + name + "' (ncrv, rk, rk-oracle)");
    }
    columns.push_back({{"label", label}, {"report", score(target, s.values)}});
    estimates.emplace_back(label, std::move(s.values));
  }

  json j = {{"kind", "in-sample"}, {"target", "iv_true"}, {"m", m}, {"n_days", panel.n_days}, {"columns", columns}};
  write_json(ctx.out_dir / (o.output + ".json"), j, ctx);
  fs::path csv = ctx.out_dir / (o.output + ".csv");
  {
    auto f = open_out(csv);
    f << "day,iv_true";
    for (const auto& [label, _] : estimates) f << ",\"" << label << '"';
    f << '\n';
    for (std::size_t d = 0; d < target.size(); ++d) {
      f << d << ',' << fmt(target[d]);
      for (const auto& e : estimates) f << ',' << fmt(e.second[d]);
      f << '\n';
    }
  }
  ctx.manifest->add_output(csv);
  for (const auto& c : columns)
    if (c.contains("report"))
      *ctx.out << c["label"].get<std::string>() << " MSE=" << c["report"]["mse"].dump() << '\n';
}

void run_rolling(const RollingOpts& o, Context& ctx) {
  IntradayPanel panel = load(o.data, ctx);
  require_truth(panel);
  std::size_t m = pick_m(o.m, panel);
  if (o.window + o.horizon > panel.n_days)
    throw UsageError("window + horizon exceeds the " + std::to_string(panel.n_days) + " days in the panel");
  std::vector<double> target(panel.iv_true.begin() + static_cast<std::ptrdiff_t>(o.window),
                             panel.iv_true.begin() + static_cast<std::ptrdiff_t>(o.window + o.horizon));
  json columns = json::array();
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> preds;
  for (const auto& name : split(o.models)) {
    ModelKind kind = model_from_string(name);
    ModelSpec spec = make_spec(kind, m, o.model_opts);
    std::string label = model_label(kind, spec.p);
    RollingOptions ro;
    ro.jobs = ctx.jobs;
    ro.fit = make_fit_options(o.model_opts, ctx);
    ro.fit.qmle.trace = false;
    ro.anchor_warm_start = !o.no_anchor;
    RollingResult rr = rolling_one_ahead(spec, panel, o.window, o.horizon, ro);
    json col = {{"label", label}, {"failures", rr.failure_count}};
    json msgs = json::array();
    for (std::size_t k = 0; k < rr.failures.size(); ++k)
      if (!rr.failures[k].empty()) msgs.push_back({{"window", k}, {"message", rr.failures[k]}});
    col["failure_messages"] = msgs;
    if (rr.failure_count > 0) warn(label + ": " + std::to_string(rr.failure_count) + " windows failed");
    try {
      col["report"] = score_partial(target, rr.predictions);
    } catch (const Error& e) {
      col["error"] = e.what();
    }
    columns.push_back(col);
    preds.emplace_back(label, std::move(rr.predictions));
  }
  json j = {{"kind", "rolling"}, {"target", "iv_true"}, {"m", m},          {"window", o.window},
            {"horizon", o.horizon}, {"first_day", o.window}, {"columns", columns}};
  write_json(ctx.out_dir / (o.output + ".json"), j, ctx);
  fs::path csv = ctx.out_dir / (o.output + ".csv");
  {
    auto f = open_out(csv);
    f << "day,iv_true";
    for (const auto& [label, _] : preds) f << ",\"" << label << '"';
    f << '\n';
    for (std::size_t k = 0; k < target.size(); ++k) {
      f << o.window + k << ',' << fmt(target[k]);
      for (const auto& p : preds) f << ',' << (p.second[k] ? fmt(*p.second[k]) : "");
      f << '\n';
    }
  }
  ctx.manifest->add_output(csv);
  for (const auto& c : columns)
    if (c.contains("report"))
      *ctx.out << c["label"].get<std::string>() << " MSE=" << c["report"]["mse"].dump() << '\n';
}

void run_signature(const SignatureOpts& o, Context& ctx) {
  IntradayPanel panel = load(o.data, ctx);
  std::vector<std::size_t> freqs;
  for (const auto& s : split(o.freqs)) freqs.push_back(parse_number<std::size_t>(s, "frequency"));
  if (freqs.empty()) throw UsageError("--freqs is empty");
  std::sort(freqs.begin(), freqs.end());

  std::vector<std::pair<std::string, std::vector<SignatureRow>>> tables;
  tables.emplace_back(o.true_prices ? "RV (true prices)" : "NCRV", signature_table(panel, freqs, !o.true_prices));
  if (!o.true_prices && panel.has_truth()) tables.emplace_back("RV (true prices)", signature_table(panel, freqs, false));

  fs::path csv = ctx.out_dir / (o.output + ".csv");
  {
    auto f = open_out(csv);
    f << "series,m,mean,se\n";
    for (const auto& [label, rows] : tables)
      for (const auto& r : rows) f << '"' << label << "\"," << r.m << ',' << fmt(r.mean) << ',' << fmt(r.se) << '\n';
  }
  ctx.manifest->add_output(csv);

  std::vector<PlotSeries> series;
  for (const auto& [label, rows] : tables) {
    PlotSeries s;
    s.label = label;
    for (const auto& r : rows) {
      s.x.push_back(static_cast<double>(r.m));
      s.y.push_back(r.mean);
      s.err.push_back(2.0 * r.se);
    }
    series.push_back(std::move(s));
  }
  PlotSpec spec;
  spec.title = "Volatility signature";
  spec.xlabel = "observations per day (m)";
  spec.ylabel = "mean realized variance";
  spec.log_x = true;
  fs::path svg = ctx.out_dir / (o.output + ".svg");
  {
    auto f = open_out(svg);
    f << line_plot_svg(spec, series);
  }
  ctx.manifest->add_output(svg);
  for (const auto& r : tables.front().second) *ctx.out << "m=" << r.m << " mean=" << r.mean << '\n';
}

void run_report(const ReportOpts& o, Context& ctx) {
  struct Column {
    std::string label;
    std::optional<EvalReport> report;
  };
  std::vector<Column> cols;
  std::string title;
  for (const auto& in : o.inputs) {
    std::ifstream f(in);
    if (!f) fail(ErrorKind::io, "cannot read " + in);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::io, in + ": " + e.what());
    }
    ctx.manifest->add_input(in);
    if (!j.contains("columns")) fail(ErrorKind::io, in + ": not an evaluate or rolling output");
    std::string kind = j.value("kind", "");
    std::string t = kind == "rolling" ? "1-ahead prediction error" : "Estimation error";
    title = title.empty() ? t : (title == t ? title : "Estimation and prediction error");
    for (const auto& c : j["columns"]) {
      Column col{c.at("label").get<std::string>(), std::nullopt};
      if (c.contains("report")) col.report = c["report"].get<EvalReport>();
      cols.push_back(std::move(col));
    }
  }

  struct Row {
    const char* name;
    double EvalReport::*field;
    int best;  // -1 min, +1 max, 0 none
  };
  const Row rows[] = {{"MSE", &EvalReport::mse, -1},           {"QLIKE", &EvalReport::qlike, -1},
                      {"R2 (adjusted)", &EvalReport::mz_adj_r2, 1}, {"a", &EvalReport::mz_a, 0},
                      {"std error (a)", &EvalReport::mz_se_a, 0},   {"b", &EvalReport::mz_b, 0},
                      {"std error (b)", &EvalReport::mz_se_b, 0}};

  auto cell = [](double v) {
    if (std::isnan(v)) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, std::abs(v) >= 1e-3 || v == 0.0 ? "%.4f" : "%.3e", v);
    return std::string(buf);
  };

  std::ostringstream md;
  md << "### " << title << "\n\n|";
  for (const auto& c : cols) md << '|' << c.label;
  md << "|\n|---";
  for (std::size_t i = 0; i < cols.size(); ++i) md << "|---";
  md << "|\n";
  for (const auto& r : rows) {
    if (std::string(r.name) == "a") {
      md << "| **Mincer-Zarnowitz regression** |";
      for (std::size_t i = 0; i < cols.size(); ++i) md << " |";
      md << '\n';
    }
    std::optional<std::size_t> best;
    if (r.best != 0)
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (!cols[i].report || std::isnan(cols[i].report.value().*r.field)) continue;
        double v = cols[i].report.value().*r.field;
        if (!best || (r.best < 0 ? v < cols[*best].report.value().*r.field : v > cols[*best].report.value().*r.field)) best = i;
      }
    md << "| " << r.name;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      md << " | " << (cols[i].report ? cell(cols[i].report.value().*r.field) : "failed");
      if (best && *best == i) md << '*';
    }
    md << " |\n";
  }
  md << "\n`*` marks the best value in the row.\n";

  fs::path mdp = ctx.out_dir / (o.output + ".md");
  {
    auto f = open_out(mdp);
    f << md.str();
  }
  ctx.manifest->add_output(mdp);

  fs::path csv = ctx.out_dir / (o.output + ".csv");
  {
    auto f = open_out(csv);
    f << "metric";
    for (const auto& c : cols) f << ",\"" << c.label << '"';
    f << '\n';
    for (const auto& r : rows) {
      f << '"' << r.name << '"';
      for (const auto& c : cols) f << ',' << (c.report ? fmt(c.report.value().*r.field) : "");
      f << '\n';
    }
  }
  ctx.manifest->add_output(csv);
  *ctx.out << md.str();
}

void run_diagnose(const DiagnoseOpts& o, Context& ctx) {
  HestonParams h = o.gen.heston();
  NoiseParams n = o.gen.noise();
  h.validate();
  n.validate();
  SrSarvParams sr = sr_sarv_from_heston(h);
  const std::size_t m = o.m;
  const std::size_t q = n.q();
  const std::size_t max_n = o.max_n == 0 ? q + 3 : o.max_n;
  const auto omega = n.omega();
  const double f_m = n.f_of_m(static_cast<double>(m));
  const double es = expected_sigma(sr);

  fs::path p = ctx.out_dir / o.output;
  auto f = open_out(p);
  f << "table,key,value\n";
  auto row = [&](const std::string& t, const std::string& k, double v) { f << t << ',' << k << ',' << fmt(v) << '\n'; };
  row("input", "f_m", f_m);
  row("input", "e_sigma", es);
  row("input", "noise_variance", n.noise_variance(static_cast<double>(m)));
  for (std::size_t i = 0; i < omega.size(); ++i) row("omega", std::to_string(i), omega[i]);
  for (std::size_t k = 1; k <= max_n; ++k) row("gamma", std::to_string(k), gamma_n(omega, k));
  for (std::size_t k = 0; k <= max_n; ++k) {
    row("c3", std::to_string(k), c3_family(omega, n.sigma_delta2(), n.omega_delta(), f_m, m, k));
    row("c3_f0", std::to_string(k), c3_family(omega, n.sigma_delta2(), n.omega_delta(), 0.0, m, k));
  }
  auto g = return_acov_theory(sr.sigma2, omega, n.sigma_delta2(), f_m, es, m);
  for (std::size_t k = 0; k < g.size(); ++k) row("G", std::to_string(k), g[k]);

  auto dump_u = [&](const std::string& t, const UMoments& u) {
    row(t, "mean", u.mean);
    row(t, "variance", u.variance);
    row(t, "lag1", u.lag1);
    for (std::size_t k = 0; k < u.higher.size(); ++k) row(t, "lag" + std::to_string(k + 2), u.higher[k]);
    try {
      Ma1Params a = ma1_from_moments(u);
      row(t, "c_u", a.c_u);
      row(t, "theta_u", a.theta_u);
      row(t, "sigma_xi2", a.sigma_xi2);
    } catch (const Error& e) {
      warn(t + ": " + e.what());
    }
  };
  UMomentInputs in{sr.sigma2, omega, n.sigma_delta2(), n.omega_delta(), f_m, es, m};
  dump_u("u_weak_f", u_moments(in, UMode::weak_f));
  in.f_m = 0.0;
  dump_u("u_exact_f0_at_f0", u_moments(in, UMode::exact_f0));

  for (std::size_t k = 0; k <= 3; ++k) {
    row("cross_cov_iv_u", std::to_string(k), cross_cov_iv_u(sr, f_m, m, k));
    row("sigma_autocov_delta", std::to_string(k), sigma_autocov_delta(sr, static_cast<double>(k)));
    row("sigma2_sigma_cov_delta", std::to_string(k), sigma2_sigma_cov_delta(sr, static_cast<double>(k)));
    row("iv_autocov", std::to_string(k), iv_autocov(sr, k));
  }
  IvArmaMap md = iv_arma_map(sr, static_cast<double>(m));
  row("iv_arma", "c_iv", md.arma.c_iv);
  for (std::size_t i = 0; i < md.arma.phi.size(); ++i) row("iv_arma", "phi_" + std::to_string(i + 1), md.arma.phi[i]);
  for (std::size_t i = 0; i < md.arma.theta.size(); ++i)
    row("iv_arma", "theta_" + std::to_string(i + 1), md.arma.theta[i]);
  row("iv_arma", "sigma_eta2", md.arma.sigma_eta2);
  row("iv_arma", "sigma_d2", md.sigma_d2);
  f.close();
  ctx.manifest->add_output(p);
  *ctx.out << "moment tables -> " << p.generic_string() << '\n';
}

}  // namespace mnrv::cli
