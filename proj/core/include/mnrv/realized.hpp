#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mnrv/market_sim.hpp"

namespace mnrv {

enum class MeasureKind { RV, NCRV, RK, RQ, RAC };

const char* to_string(MeasureKind k);
MeasureKind measure_from_string(const std::string& s);

struct RealizedSeries {
  MeasureKind kind = MeasureKind::NCRV;
  std::size_t m = 0;
  std::size_t lag = 0;  // RAC only
  std::vector<double> values;
  std::vector<double> bandwidth;  // RK only, per-day H
  std::size_t negative_count = 0;
};

struct BandwidthSpec {
  enum class Mode { rough, oracle, fixed };
  Mode mode = Mode::rough;
  double c = 3.5134;
  std::size_t rq_m = 96;
  double value = 0.0;  // fixed H
  double T = 1.0;

  static BandwidthSpec parse(const std::string& s);  // rough | oracle | fixed:<H>
};

double realized_variance(std::span<const double> r);
double realized_autocov(std::span<const double> r, std::size_t h);
double parzen_kernel(double x);
double realized_kernel(std::span<const double> r, double H);
double realized_quarticity(std::span<const double> r);

// H = c * xi^(4/5) * m^(3/5) from xi^2.
double bandwidth_from_xi2(double xi2, double m, double c = 3.5134);
// xi^2 = (RV/(2m)) / sqrt(T * RQ), RQ computed from the coarser returns.
double rough_bandwidth(std::span<const double> r_m, std::span<const double> r_rq, double T = 1.0,
                       double c = 3.5134);
// xi^2 = Var[eps] / sqrt(T * IQ) with generator truth.
double oracle_bandwidth(double noise_var, double iq, double m, double T = 1.0, double c = 3.5134);

// Per-day series from a panel. `observed=false` uses the true price (RV rather than NCRV).
RealizedSeries compute_series(const IntradayPanel& panel, MeasureKind kind, std::size_t m,
                              const BandwidthSpec& bw = {}, std::size_t lag = 0);

struct SignatureRow {
  std::size_t m = 0;
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean over days
};

std::vector<SignatureRow> signature_table(const IntradayPanel& panel,
                                          const std::vector<std::size_t>& frequencies,
                                          bool observed = true);

}  // namespace mnrv
