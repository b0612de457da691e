#include "mnrv/realized.hpp"

#include <cmath>

#include "mnrv/error.hpp"
#include "mnrv/numeric.hpp"

namespace mnrv {

const char* to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::RV: return "rv";
    case MeasureKind::NCRV: return "ncrv";
    case MeasureKind::RK: return "rk";
    case MeasureKind::RQ: return "rq";
    case MeasureKind::RAC: return "rac";
  }
  return "?";
}

MeasureKind measure_from_string(const std::string& s) {
  if (s == "rv") return MeasureKind::RV;
  if (s == "ncrv") return MeasureKind::NCRV;
  if (s == "rk") return MeasureKind::RK;
  if (s == "rq") return MeasureKind::RQ;
  if (s == "rac") return MeasureKind::RAC;
  fail(ErrorKind::invalid_argument, "unknown measure '" + s + "'");
}

BandwidthSpec BandwidthSpec::parse(const std::string& s) {
  BandwidthSpec b;
  if (s == "rough") return b;
  if (s == "oracle") {
    b.mode = Mode::oracle;
    return b;
  }
  if (s.rfind("fixed:", 0) == 0) {
    b.mode = Mode::fixed;
    try {
      b.value = std::stod(s.substr(6));
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_argument, "bandwidth: cannot parse '" + s + "'");
    }
    require(b.value >= 0.0, "bandwidth: fixed H must be >= 0");
    return b;
  }
  fail(ErrorKind::invalid_argument, "bandwidth must be rough, oracle or fixed:<H>");
}

double realized_variance(std::span<const double> r) {
  require(!r.empty(), "realized variance of an empty day");
  return pairwise_sum_of(r.size(), [&](std::size_t i) { return r[i] * r[i]; });
}

double realized_autocov(std::span<const double> r, std::size_t h) {
  require(!r.empty(), "realized autocovariance of an empty day");
  require(h < r.size(), "realized autocovariance: lag must be < m");
  if (h == 0) return realized_variance(r);
  return pairwise_sum_of(r.size() - h, [&](std::size_t i) { return r[i] * r[i + h]; });
}

double parzen_kernel(double x) {
  require(x >= 0.0, "parzen kernel: x must be >= 0");
  if (x <= 0.5) return 1.0 - 6.0 * x * x + 6.0 * x * x * x;
  if (x <= 1.0) {
    double y = 1.0 - x;
    return 2.0 * y * y * y;
  }
  return 0.0;
}

double realized_kernel(std::span<const double> r, double H) {
  require(H > 0.0, "realized kernel: H must be > 0");
  double rv = realized_variance(r);
  double tail = 0.0;
  for (std::size_t h = 1; h < r.size() && static_cast<double>(h) < H; ++h)
    tail += parzen_kernel(static_cast<double>(h) / H) * realized_autocov(r, h);
  return rv + 2.0 * tail;
}

double realized_quarticity(std::span<const double> r) {
  require(!r.empty(), "realized quarticity of an empty day");
  double s = pairwise_sum_of(r.size(), [&](std::size_t i) {
    double r2 = r[i] * r[i];
    return r2 * r2;
  });
  return static_cast<double>(r.size()) / 3.0 * s;
}

double bandwidth_from_xi2(double xi2, double m, double c) {
  require(xi2 >= 0.0, "bandwidth: xi^2 must be >= 0");
  return c * std::pow(xi2, 0.4) * std::pow(m, 0.6);
}

double rough_bandwidth(std::span<const double> r_m, std::span<const double> r_rq, double T, double c) {
  double rq = realized_quarticity(r_rq);
  if (!(rq > 0.0)) fail(ErrorKind::numerical, "rough bandwidth: realized quarticity is zero");
  double m = static_cast<double>(r_m.size());
  double xi2 = (realized_variance(r_m) / (2.0 * m)) / std::sqrt(T * rq);
  return bandwidth_from_xi2(xi2, m, c);
}

double oracle_bandwidth(double noise_var, double iq, double m, double T, double c) {
  if (!(iq > 0.0)) fail(ErrorKind::numerical, "oracle bandwidth: integrated quarticity is zero");
  return bandwidth_from_xi2(noise_var / std::sqrt(T * iq), m, c);
}

RealizedSeries compute_series(const IntradayPanel& panel, MeasureKind kind, std::size_t m,
                              const BandwidthSpec& bw, std::size_t lag) {
  require(m >= 1 && panel.m % m == 0, "measure frequency must divide the panel grid");
  RealizedSeries out;
  out.kind = kind;
  out.m = m;
  out.lag = lag;
  out.values.resize(panel.n_days);
  bool observed = kind != MeasureKind::RV;
  if (kind == MeasureKind::RK) {
    out.bandwidth.resize(panel.n_days);
    if (bw.mode == BandwidthSpec::Mode::rough)
      require(panel.m % bw.rq_m == 0, "bandwidth: RQ frequency must divide the panel grid");
    if (bw.mode == BandwidthSpec::Mode::oracle)
      require(panel.has_truth() && panel.iq_true.size() == panel.n_days,
              "oracle bandwidth needs a simulated panel");
  }
  for (std::size_t d = 0; d < panel.n_days; ++d) {
    auto r = panel.returns(d, m, observed);
    double v = 0.0;
    switch (kind) {
      case MeasureKind::RV:
      case MeasureKind::NCRV: v = realized_variance(r); break;
      case MeasureKind::RQ: v = realized_quarticity(r); break;
      case MeasureKind::RAC: v = realized_autocov(r, lag); break;
      case MeasureKind::RK: {
        double H = bw.value;
        if (bw.mode == BandwidthSpec::Mode::rough) {
          auto rq = panel.returns(d, bw.rq_m, true);
          H = rough_bandwidth(r, rq, bw.T, bw.c);
        } else if (bw.mode == BandwidthSpec::Mode::oracle) {
          auto e = panel.noise(d);
          double me = mean(e);
          double ve = pairwise_sum_of(e.size(), [&](std::size_t i) { return (e[i] - me) * (e[i] - me); }) /
                      static_cast<double>(e.size());
          H = oracle_bandwidth(ve, panel.iq_true[d], static_cast<double>(m), bw.T, bw.c);
        }
        out.bandwidth[d] = H;
        v = H > 0.0 ? realized_kernel(r, H) : realized_variance(r);
        break;
      }
    }
    if (v < 0.0) ++out.negative_count;
    out.values[d] = v;
  }
  return out;
}

std::vector<SignatureRow> signature_table(const IntradayPanel& panel,
                                          const std::vector<std::size_t>& frequencies, bool observed) {
  require(!frequencies.empty(), "signature table: no frequencies");
  std::vector<SignatureRow> rows;
  for (std::size_t f : frequencies) {
    if (f == 0 || panel.m % f != 0)
      fail(ErrorKind::invalid_argument,
           "signature table: frequency " + std::to_string(f) + " does not divide m=" + std::to_string(panel.m));
    auto s = compute_series(panel, observed ? MeasureKind::NCRV : MeasureKind::RV, f);
    SignatureRow row;
    row.m = f;
    row.mean = mean(s.values);
    row.se = s.values.size() > 1 ? std::sqrt(sample_variance(s.values) / static_cast<double>(s.values.size()))
                                  : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mnrv
