#include "cli/app.hpp"

#include <iostream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "cli/commands.hpp"
#include "cli/json_config.hpp"
#include "mnrv/error.hpp"
#include "mnrv/version.hpp"

namespace mnrv::cli {

using nlohmann::json;

namespace {

std::mutex g_warn_mu;
std::vector<std::string>* g_warnings = nullptr;
std::ostream* g_warn_stream = nullptr;

void collect_warning(const std::string& w) {
  std::lock_guard<std::mutex> lock(g_warn_mu);
  if (g_warnings) g_warnings->push_back(w);
  if (g_warn_stream) *g_warn_stream << "warning: " << w << '\n';
}

void error_json(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir = ".";
  std::string trace;
  bool print_schema = false;
  bool print_config = false;

  SimulateOpts simulate;
  IngestOpts ingest;
  MeasuresOpts measures;
  IdentifyOpts identify;
  FitOpts fit;
  EvaluateOpts evaluate;
  RollingOpts rolling;
  SignatureOpts signature;
  ReportOpts report;
  DiagnoseOpts diagnose;
};

void build(CLI::App& app, Options& o) {
  app.description("Simulation, realized measures and state-space volatility models for noisy high-frequency prices.");
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON configuration; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_version_flag("--version", std::string("mnrv ") + mnrv::version());
  app.add_option("--seed", o.seed, "Random seed (falls back to MNRV_SEED)")->envname("MNRV_SEED");
  app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", o.out_dir, "Directory for outputs and the run manifest");
  app.add_option("--trace", o.trace, "Write optimizer traces to this CSV file");
  app.add_flag("--print-schema", o.print_schema, "Print the configuration JSON Schema and exit")->configurable(false);
  app.add_flag("--print-config", o.print_config, "Print the effective configuration and exit")->configurable(false);
  app.require_subcommand(0, 1);
  app.fallthrough();

  auto* sim = app.add_subcommand("simulate", "Simulate a noisy intraday price panel");
  o.simulate.gen.add_to(*sim);
  sim->add_option("--days", o.simulate.days, "Number of days")->check(CLI::PositiveNumber);
  sim->add_option("--m", o.simulate.m, "Observations per day")->check(CLI::PositiveNumber);
  sim->add_option("--sub-steps", o.simulate.sub_steps, "Euler steps per observation interval")
      ->check(CLI::PositiveNumber);
  sim->add_flag("--fixed-start", o.simulate.fixed_start, "Start the variance at its mean instead of a stationary draw");
  sim->add_flag("--store-sigma2", o.simulate.store_sigma2, "Keep the variance path in the sidecar");
  sim->add_option("--output", o.simulate.output, "Panel CSV file name");

  auto* ing = app.add_subcommand("ingest", "Resample a tick file onto a grid and drop inactive days");
  ing->add_option("--input", o.ingest.input, "CSV with timestamp,bid,ask or timestamp,mid")->required();
  ing->add_option("--m", o.ingest.m, "Grid points per day")->required()->check(CLI::PositiveNumber);
  ing->add_option("--tz", o.ingest.tz, "Day boundary zone: UTC or a fixed offset such as +09:00");
  ing->add_option("--scale", o.ingest.scale, "Log-price scale, p = scale * log(mid)");
  ing->add_option("--day-seconds", o.ingest.day_seconds, "Trading-day length in seconds");
  ing->add_option("--max-missing", o.ingest.max_missing, "Exclude days with at least this many missing slots");
  ing->add_option("--max-zero-returns", o.ingest.max_zero_returns, "Exclude days with more zero returns");
  ing->add_option("--max-flat-minutes", o.ingest.max_flat_minutes, "Exclude days flat for longer than this");
  ing->add_flag("--no-filter", o.ingest.no_filter, "Keep every day");
  ing->add_option("--output", o.ingest.output, "Panel CSV file name");

  auto* mea = app.add_subcommand("measures", "Per-day realized measures");
  mea->add_option("--data", o.measures.data, "Panel CSV")->required();
  mea->add_option("--kind", o.measures.kind, "rv|ncrv|rk|rq|rac")->required();
  mea->add_option("--m", o.measures.m, "Sampling frequency (default: panel grid)");
  mea->add_option("--bandwidth", o.measures.bandwidth, "rough|oracle|fixed:<H>");
  mea->add_option("--lag", o.measures.lag, "Lag for rac");
  mea->add_option("--rq-m", o.measures.rq_m, "Frequency of the quarticity in the rough bandwidth");
  mea->add_option("--output", o.measures.output, "Output CSV file name");

  auto* idf = app.add_subcommand("identify", "Return autocovariances, noise order and moment identification");
  idf->add_option("--data", o.identify.data, "Panel CSV")->required();
  idf->add_option("--m", o.identify.m, "Sampling frequency (default: panel grid)");
  idf->add_option("--q", o.identify.q, "Noise MA order or auto");
  idf->add_option("--f", o.identify.f, "f(m) used in the closing equation");
  idf->add_option("--e-sigma", o.identify.e_sigma, "E[sigma(t)] used with --f (default sqrt of sigma^2)");
  idf->add_option("--max-lag", o.identify.max_lag, "Autocovariance lags (0: min(m-1, 40))");
  idf->add_option("--level", o.identify.level, "Significance level of the order selection");
  idf->add_option("--output", o.identify.output, "Output JSON file name");

  auto* fit = app.add_subcommand("fit", "Fit one state-space model by QMLE");
  fit->add_option("--data", o.fit.data, "Panel CSV")->required();
  fit->add_option("--model", o.fit.model, "bsm|nw|zerof|weakf")->required();
  fit->add_option("--m", o.fit.m, "Sampling frequency (default: panel grid)");
  o.fit.model_opts.add_to(*fit);

  auto* ev = app.add_subcommand("evaluate", "In-sample accuracy of models and realized kernels against true IV");
  ev->add_option("--data", o.evaluate.data, "Simulated panel CSV")->required();
  ev->add_option("--m", o.evaluate.m, "Sampling frequency (default: panel grid)");
  ev->add_option("--models", o.evaluate.models, "Comma-separated models, may be empty");
  ev->add_option("--measures", o.evaluate.measures, "Comma-separated subset of ncrv,rk,rk-oracle");
  ev->add_option("--output", o.evaluate.output, "Output file stem");
  o.evaluate.model_opts.add_to(*ev);

  auto* ro = app.add_subcommand("rolling", "Rolling one-day-ahead forecasts");
  ro->add_option("--data", o.rolling.data, "Simulated panel CSV")->required();
  ro->add_option("--m", o.rolling.m, "Sampling frequency (default: panel grid)");
  ro->add_option("--models", o.rolling.models, "Comma-separated models");
  ro->add_option("--window", o.rolling.window, "Estimation window in days")->required()->check(CLI::PositiveNumber);
  ro->add_option("--horizon", o.rolling.horizon, "Number of forecasts")->required()->check(CLI::PositiveNumber);
  ro->add_flag("--no-anchor", o.rolling.no_anchor, "Run the full multistart in every window");
  ro->add_option("--output", o.rolling.output, "Output file stem");
  o.rolling.model_opts.add_to(*ro);

  auto* sig = app.add_subcommand("signature-plot", "Mean realized variance against sampling frequency");
  sig->add_option("--data", o.signature.data, "Panel CSV")->required();
  sig->add_option("--freqs", o.signature.freqs, "Comma-separated frequencies dividing the grid");
  sig->add_flag("--true-prices", o.signature.true_prices, "Use noise-free prices");
  sig->add_option("--output", o.signature.output, "Output file stem");

  auto* rep = app.add_subcommand("report", "Comparison table from evaluate or rolling outputs");
  rep->add_option("--input", o.report.inputs, "evaluate/rolling JSON files")->required()->expected(1, -1);
  rep->add_option("--output", o.report.output, "Output file stem");

  auto* dia = app.add_subcommand("diagnose-moments", "Dump the noise moment case tables for a parameter set");
  o.diagnose.gen.add_to(*dia);
  dia->add_option("--m", o.diagnose.m, "Observations per day")->check(CLI::PositiveNumber);
  dia->add_option("--max-n", o.diagnose.max_n, "Largest lag in the tables (0: q+3)");
  dia->add_option("--output", o.diagnose.output, "Output CSV file name");
}

json schema_of(const CLI::App& app) {
  json props = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "version") continue;
    std::string tn = opt->get_type_name();
    json t;
    if (opt->get_expected_max() == 0 || tn == "BOOLEAN") t = {{"type", "boolean"}};
    else if (tn.rfind("INT", 0) == 0 || tn.rfind("UINT", 0) == 0) t = {{"type", "integer"}};
    else if (tn.rfind("FLOAT", 0) == 0) t = {{"type", "number"}};
    else t = {{"type", "string"}};
    if (opt->get_expected_max() > 1) t = {{"type", "array"}, {"items", t}};
    t["description"] = opt->get_description();
    props[name] = t;
  }
  for (const CLI::App* sub : app.get_subcommands({})) props[sub->get_name()] = schema_of(*sub);
  return {{"type", "object"}, {"additionalProperties", false}, {"properties", props}};
}

json effective_config(const CLI::App& app, const std::string& active) {
  json all = json::parse(JsonConfig().to_config(&app, true, false, ""));
  json out = json::object();
  for (auto it = all.begin(); it != all.end(); ++it) {
    bool is_sub = false;
    for (const CLI::App* sub : app.get_subcommands({}))
      if (sub->get_name() == it.key()) is_sub = true;
    if (!is_sub || it.key() == active) out[it.key()] = it.value();
  }
  out.erase("print-schema");
  out.erase("print-config");
  return out;
}

}  // namespace

std::string config_schema() {
  CLI::App app("mnrv", "mnrv");
  Options o;
  build(app, o);
  json s = schema_of(app);
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = "mnrv configuration";
  return s.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("mnrv", "mnrv");
  Options o;
  build(app, o);
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    const std::string ini = "INI was not able to parse ";
    if (msg.rfind(ini, 0) == 0) msg = "unknown configuration key " + msg.substr(ini.size());
    error_json(err, "usage", msg);
    return 2;
  }

  if (o.print_schema) {
    out << config_schema();
    return 0;
  }
  auto parsed = app.get_subcommands();
  if (parsed.empty()) {
    if (o.print_config) {
      out << effective_config(app, "").dump(2) << '\n';
      return 0;
    }
    error_json(err, "usage", "a subcommand is required; run with --help");
    return 2;
  }
  const std::string name = parsed.front()->get_name();
  if (o.print_config) {
    out << effective_config(app, name).dump(2) << '\n';
    return 0;
  }

  Manifest manifest(name, args);
  Context ctx;
  ctx.out_dir = o.out_dir;
  if (app.get_option("--seed")->count() > 0) ctx.seed = o.seed;
  ctx.jobs = o.jobs;
  ctx.trace = o.trace;
  ctx.manifest = &manifest;
  ctx.out = &out;

  std::vector<std::string> warnings;
  {
    std::lock_guard<std::mutex> lock(g_warn_mu);
    g_warnings = &warnings;
    g_warn_stream = &err;
  }
  set_warning_handler(collect_warning);
  struct Restore {
    ~Restore() {
      set_warning_handler(nullptr);
      std::lock_guard<std::mutex> lock(g_warn_mu);
      g_warnings = nullptr;
      g_warn_stream = nullptr;
    }
  } restore;

  try {
    std::filesystem::create_directories(ctx.out_dir);
    if (!o.config.empty()) manifest.add_input(o.config);
    manifest.set_config(effective_config(app, name));
    if (ctx.seed) manifest.set_seed(*ctx.seed);
    if (name == "simulate") run_simulate(o.simulate, ctx);
    else if (name == "ingest") run_ingest(o.ingest, ctx);
    else if (name == "measures") run_measures(o.measures, ctx);
    else if (name == "identify") run_identify(o.identify, ctx);
    else if (name == "fit") run_fit(o.fit, ctx);
    else if (name == "evaluate") run_evaluate(o.evaluate, ctx);
    else if (name == "rolling") run_rolling(o.rolling, ctx);
    else if (name == "signature-plot") run_signature(o.signature, ctx);
    else if (name == "report") run_report(o.report, ctx);
    else if (name == "diagnose-moments") run_diagnose(o.diagnose, ctx);
    for (const auto& w : warnings) manifest.add_warning(w);
    auto path = manifest.write(ctx.out_dir);
    out << "manifest: " << path.generic_string() << '\n';
  } catch (const UsageError& e) {
    error_json(err, "usage", e.what());
    return 2;
  } catch (const Error& e) {
    error_json(err, to_string(e.kind()), e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    error_json(err, "io", e.what());
    return 1;
  } catch (const std::exception& e) {
    error_json(err, "internal", e.what());
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace mnrv::cli
