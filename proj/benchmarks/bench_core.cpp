#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mnrv/market_sim.hpp"
#include "mnrv/models.hpp"
#include "mnrv/realized.hpp"
#include "mnrv/state_space.hpp"

using namespace mnrv;

namespace {

IntradayPanel reference_panel(std::size_t days, std::size_t m) {
  SimOptions opt;
  opt.n_days = days;
  opt.m = m;
  opt.sub_steps = 4;
  opt.seed = 1;
  return simulate_panel(reference_heston(), NoiseParams::reference(), opt);
}

}  // namespace

static void BM_SimulateDay(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  SimOptions opt;
  opt.n_days = 10;
  opt.m = m;
  opt.sub_steps = 60;
  for (auto _ : state) {
    opt.seed++;
    benchmark::DoNotOptimize(simulate_panel(reference_heston(), NoiseParams::reference(), opt));
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_SimulateDay)->Arg(288)->Arg(1440)->Unit(benchmark::kMillisecond);

static void BM_RealizedKernel(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 g(3);
  std::normal_distribution<double> z(0.0, 0.02);
  std::vector<double> r(m);
  for (double& x : r) x = z(g);
  const double H = 0.05 * static_cast<double>(m);
  for (auto _ : state) benchmark::DoNotOptimize(realized_kernel(r, H));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_RealizedKernel)->Arg(288)->Arg(1440)->Arg(23400);

static void BM_KalmanLoglik(benchmark::State& state) {
  const auto days = static_cast<std::size_t>(state.range(0));
  auto panel = reference_panel(days, 288);
  ModelSpec spec;
  spec.kind = ModelKind::ZeroF;
  spec.m = 288;
  auto ncrv = compute_series(panel, MeasureKind::NCRV, 288).values;
  auto fm = fit_model(spec, ncrv, panel.pooled_returns(288, true));
  for (auto _ : state) benchmark::DoNotOptimize(kalman_loglik(fm.ssm, ncrv));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(days));
}
BENCHMARK(BM_KalmanLoglik)->Arg(500)->Arg(2000);

static void BM_FitZeroF(benchmark::State& state) {
  auto panel = reference_panel(300, 288);
  ModelSpec spec;
  spec.kind = ModelKind::ZeroF;
  spec.m = 288;
  auto ncrv = compute_series(panel, MeasureKind::NCRV, 288).values;
  auto r = panel.pooled_returns(288, true);
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(spec, ncrv, r));
}
BENCHMARK(BM_FitZeroF)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
