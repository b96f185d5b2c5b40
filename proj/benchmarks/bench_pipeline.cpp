#include <benchmark/benchmark.h>

#include "lpf/gradient.hpp"
#include "lpf/metrics.hpp"
#include "lpf/optimizer.hpp"
#include "lpf/synthetic.hpp"

namespace {

lpf::FitConfig default_config() {
  lpf::FitConfig cfg;
  cfg.seed = 3;
  return cfg;
}

void bm_pipeline_forward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const lpf::Image input = lpf::synthetic_photo(n, n, 1);
  const lpf::FilterStack stack = lpf::to_filter_stack(lpf::init_stack(default_config(), 3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lpf::pipeline_forward(stack, input));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_loss_and_grad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const lpf::Image input = lpf::synthetic_photo(n, n, 1);
  const lpf::Image target = lpf::synthetic_photo(n, n, 2);
  const lpf::FitConfig cfg = default_config();
  const lpf::ParamVector params = lpf::init_stack(cfg, 3);
  const lpf::LossEvaluator eval(target, cfg.weights, cfg.msssim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lpf::loss_and_grad(params, input, eval));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_msssim(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const lpf::Image a = lpf::synthetic_photo(n, n, 1);
  const lpf::Image b = lpf::synthetic_photo(n, n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lpf::msssim_l(a, b));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void bm_fit_steps(benchmark::State& state) {
  const lpf::Image input = lpf::synthetic_photo(64, 64, 1);
  const lpf::Image target = lpf::synthetic_photo(64, 64, 2);
  lpf::FitConfig cfg = default_config();
  cfg.steps = 50;
  cfg.deterministic = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lpf::fit(input, target, cfg));
  }
}

}  // namespace

BENCHMARK(bm_pipeline_forward)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_loss_and_grad)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_msssim)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_fit_steps)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
