#include "mnrv/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "mnrv/error.hpp"
#include "mnrv/numeric.hpp"
#include "mnrv/realized.hpp"

namespace mnrv {

EvalReport score(std::span<const double> target, std::span<const double> estimate) {
  require(target.size() == estimate.size(), "score: series lengths differ");
  const std::size_t n = target.size();
  require(n >= 3, "score: need at least 3 observations");
  for (std::size_t i = 0; i < n; ++i) {
    require(target[i] > 0.0, "score: target must be positive");
    if (estimate[i] == 0.0) fail(ErrorKind::invalid_argument, "score: zero estimate makes QLIKE undefined");
  }
  const double dn = static_cast<double>(n);
  EvalReport r;
  r.n = n;
  r.mse = pairwise_sum_of(n, [&](std::size_t i) {
            double e = target[i] - estimate[i];
            return e * e;
          }) / dn;
  r.qlike = pairwise_sum_of(n, [&](std::size_t i) {
              double a = std::abs(estimate[i]);
              return std::log(a) + target[i] / a;
            }) / dn;

  // target = a + b * estimate + e
  const double mx = mean(estimate), my = mean(target);
  const double sxx = pairwise_sum_of(n, [&](std::size_t i) { return (estimate[i] - mx) * (estimate[i] - mx); });
  const double sxy = pairwise_sum_of(n, [&](std::size_t i) { return (estimate[i] - mx) * (target[i] - my); });
  const double syy = pairwise_sum_of(n, [&](std::size_t i) { return (target[i] - my) * (target[i] - my); });
  if (sxx > 0.0) {
    r.mz_b = sxy / sxx;
    r.mz_a = my - r.mz_b * mx;
    const double sse = pairwise_sum_of(n, [&](std::size_t i) {
      double e = target[i] - r.mz_a - r.mz_b * estimate[i];
      return e * e;
    });
    const double s2 = sse / (dn - 2.0);
    r.mz_se_b = std::sqrt(s2 / sxx);
    r.mz_se_a = std::sqrt(s2 * (1.0 / dn + mx * mx / sxx));
    r.mz_r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    r.mz_adj_r2 = 1.0 - (1.0 - r.mz_r2) * (dn - 1.0) / (dn - 2.0);
  } else {
    // Constant forecast: the slope is not identified.
    r.mz_a = my;
    r.mz_b = std::nan("");
    r.mz_se_a = std::sqrt(syy / (dn - 1.0) / dn);
    r.mz_se_b = std::nan("");
    r.mz_r2 = 0.0;
    r.mz_adj_r2 = 1.0 - (dn - 1.0) / (dn - 2.0);
  }
  return r;
}

EvalReport score_partial(std::span<const double> target, const std::vector<std::optional<double>>& estimate) {
  require(target.size() == estimate.size(), "score: series lengths differ");
  std::vector<double> t, e;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!estimate[i]) continue;
    t.push_back(target[i]);
    e.push_back(*estimate[i]);
  }
  EvalReport r = score(t, e);
  r.skipped = target.size() - t.size();
  return r;
}

RollingResult rolling_one_ahead(const ModelSpec& spec, std::span<const double> ncrv,
                                std::span<const double> returns, std::size_t W, std::size_t P,
                                const RollingOptions& options) {
  require(W >= 10 && P >= 1, "rolling: need W >= 10 and P >= 1");
  require(W + P <= ncrv.size(), "rolling: W + P exceeds the number of days");
  const bool needs_returns = spec.kind == ModelKind::ZeroF || spec.kind == ModelKind::WeakF;
  if (needs_returns) require(returns.size() == ncrv.size() * spec.m, "rolling: returns do not match NCRV days");

  RollingResult res;
  res.window = W;
  res.first_day = W;
  res.predictions.assign(P, std::nullopt);
  res.failures.assign(P, std::string());

  auto window_fit = [&](std::size_t k, const FitOptions& fo) {
    auto y = ncrv.subspan(k, W);
    std::span<const double> r;
    if (needs_returns) r = returns.subspan(k * spec.m, W * spec.m);
    auto fm = fit_model(spec, y, r, fo);
    return std::make_pair(fm, estimate_iv(fm, y).next_iv);
  };

  FitOptions per_window = options.fit;
  std::size_t begin = 0;
  if (options.anchor_warm_start) {
    try {
      auto [fm, pred] = window_fit(0, options.fit);
      res.predictions[0] = pred;
      per_window.warm_start = std::vector<double>(fm.fit.params.data(), fm.fit.params.data() + fm.fit.params.size());
      per_window.qmle.starts = 1;
    } catch (const std::exception& e) {
      res.failures[0] = e.what();
    }
    begin = 1;
  }

  std::atomic<std::size_t> next{begin};
  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= P) return;
      try {
        res.predictions[k] = window_fit(k, per_window).second;
      } catch (const std::exception& e) {
        res.failures[k] = e.what();
      }
    }
  };
  std::size_t jobs = std::max<std::size_t>(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t k = 0; k < P; ++k)
    if (!res.predictions[k]) ++res.failure_count;
  return res;
}

RollingResult rolling_one_ahead(const ModelSpec& spec, const IntradayPanel& panel, std::size_t W, std::size_t P,
                                const RollingOptions& options) {
  auto ncrv = compute_series(panel, MeasureKind::NCRV, spec.m);
  std::vector<double> r;
  if (spec.kind == ModelKind::ZeroF || spec.kind == ModelKind::WeakF) r = panel.pooled_returns(spec.m, true);
  return rolling_one_ahead(spec, ncrv.values, r, W, P, options);
}

}  // namespace mnrv
