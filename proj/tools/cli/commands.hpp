#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "cli/manifest.hpp"
#include "mnrv/market_sim.hpp"

namespace mnrv::cli {

// Bad invocation detected after parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string trace;  // trace CSV path, empty when disabled
  Manifest* manifest = nullptr;
  std::ostream* out = nullptr;
};

struct GeneratorOpts {
  double kappa, sigma2, gamma, rho;
  double f, alpha, sigma_zeta, sigma_delta, delta_kurtosis;
  std::string psi;
  bool no_noise = false;

  GeneratorOpts();
  void add_to(CLI::App& app);
  HestonParams heston() const;
  NoiseParams noise() const;
};

struct SimulateOpts {
  GeneratorOpts gen;
  std::size_t days = 500, m = 1440, sub_steps = 60;
  bool fixed_start = false, store_sigma2 = false;
  std::string output = "panel.csv";
};

struct IngestOpts {
  std::string input, tz = "UTC", output = "panel.csv";
  std::size_t m = 0;
  double scale = 100.0;
  std::int64_t day_seconds = 86400;
  int max_missing = 500, max_zero_returns = 1000;
  double max_flat_minutes = 35.0;
  bool no_filter = false;
};

struct MeasuresOpts {
  std::string data, kind, bandwidth = "rough", output;
  std::size_t m = 0, lag = 1, rq_m = 96;
};

struct IdentifyOpts {
  std::string data, q = "auto", output = "identify.json";
  std::size_t m = 0, max_lag = 0;
  double f = 0.0, level = 0.01;
  std::optional<double> e_sigma;
};

struct ModelOpts {
  std::string q = "auto";
  std::size_t p = 1, max_lag = 0, starts = 3;
  double level = 0.01;
  std::optional<double> fix_f;
  void add_to(CLI::App& app);
};

struct FitOpts {
  std::string data, model;
  std::size_t m = 0;
  ModelOpts model_opts;
};

struct EvaluateOpts {
  std::string data, models = "nw,zerof,weakf", measures = "rk,rk-oracle", output = "evaluate";
  std::size_t m = 0;
  ModelOpts model_opts;
};

struct RollingOpts {
  std::string data, models = "nw,zerof,weakf", output = "rolling";
  std::size_t m = 0, window = 0, horizon = 0;
  bool no_anchor = false;
  ModelOpts model_opts;
};

struct SignatureOpts {
  std::string data, freqs = "48,144,288,1440", output = "signature";
  bool true_prices = false;
};

struct ReportOpts {
  std::vector<std::string> inputs;
  std::string output = "report";
};

struct DiagnoseOpts {
  GeneratorOpts gen;
  std::size_t m = 1440, max_n = 0;
  std::string output = "moments.csv";
};

void run_simulate(const SimulateOpts& o, Context& ctx);
void run_ingest(const IngestOpts& o, Context& ctx);
void run_measures(const MeasuresOpts& o, Context& ctx);
void run_identify(const IdentifyOpts& o, Context& ctx);
void run_fit(const FitOpts& o, Context& ctx);
void run_evaluate(const EvaluateOpts& o, Context& ctx);
void run_rolling(const RollingOpts& o, Context& ctx);
void run_signature(const SignatureOpts& o, Context& ctx);
void run_report(const ReportOpts& o, Context& ctx);
void run_diagnose(const DiagnoseOpts& o, Context& ctx);

}  // namespace mnrv::cli
