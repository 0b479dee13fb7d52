#include <limits>

#include <benchmark/benchmark.h>

#include "copo/conservative.hpp"
#include "copo/dists.hpp"
#include "copo/environments.hpp"
#include "copo/history.hpp"
#include "copo/mis_estimator.hpp"

using namespace copo;

namespace {

History make_history(const GaussianSyntheticEnv& env, std::size_t t, bool grid) {
  const auto& arms = std::get<DiscreteArms>(env.arm_space());
  History h(env.family());
  if (grid) h.enable_density_grid(-6.0, 6.44, 500);
  auto rng = make_rng(1);
  for (std::size_t i = 0; i < t; ++i) {
    const Arm& x = arms[i % arms.size()];
    auto d = env.draw(x, rng);
    h.append(x, std::move(d.z), d.payoff);
  }
  return h;
}

void BM_HistoryAppend(benchmark::State& state) {
  const auto env = make_default_synthetic();
  const auto t = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make_history(*env, t, false).size());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HistoryAppend)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_TruncatedEstimate(benchmark::State& state) {
  const auto env = make_default_synthetic();
  const auto h = make_history(*env, static_cast<std::size_t>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(truncated_bh_estimate(h, Arm{0.2}, 5.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TruncatedEstimate)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_ConfidenceInterval(benchmark::State& state) {
  const auto env = make_default_synthetic();
  const auto mode = static_cast<Renyi2Mode>(state.range(1));
  const auto h = make_history(*env, static_cast<std::size_t>(state.range(0)),
                              mode == Renyi2Mode::quadrature);
  EstimatorOptions opt;
  opt.d2_mode = mode;
  opt.payoff_range = env->payoff_range();
  for (auto _ : state) benchmark::DoNotOptimize(confidence_interval(h, Arm{0.2}, 1e-6, opt).upper);
}
BENCHMARK(BM_ConfidenceInterval)
    ->ArgsProduct({{256, 2048}, {static_cast<long>(Renyi2Mode::quadrature),
                                 static_cast<long>(Renyi2Mode::component_bound)}});

void BM_Renyi2QuadratureMixture(benchmark::State& state) {
  std::vector<DiagGaussian> comps;
  for (long i = 0; i < state.range(0); ++i) comps.emplace_back(std::vector<double>{0.11 * i}, std::vector<double>{0.5});
  const Mixture mix(std::move(comps));
  const DiagGaussian p({0.2}, {0.5});
  for (auto _ : state) benchmark::DoNotOptimize(renyi2_quadrature(p, mix));
}
BENCHMARK(BM_Renyi2QuadratureMixture)->Arg(1)->Arg(5)->Arg(25);

void BM_SelectionStep(benchmark::State& state) {
  const auto env = make_default_synthetic();
  const auto& arms = std::get<DiscreteArms>(env->arm_space());
  const auto h = make_history(*env, static_cast<std::size_t>(state.range(0)), true);
  ConservativeConfig cc;
  cc.alpha = 0.1;
  cc.baseline_arm = env->default_baseline();
  cc.baseline_mu = *env->mu(cc.baseline_arm);
  cc.budget_mode = state.range(1) ? BudgetMode::frozen : BudgetMode::paper_exact;
  EstimatorOptions est;
  est.d2_mode = Renyi2Mode::quadrature;
  est.payoff_range = env->payoff_range();
  BudgetState budget;
  for (std::size_t i = 0; i < h.size(); ++i) budget.record(0.5);
  const auto sched = Schedules::discrete(0.1, arms.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_improved_conservative(h, arms, cc, sched, est, &budget).arm);
  }
}
BENCHMARK(BM_SelectionStep)->ArgsProduct({{256, 2048}, {0, 1}});

}  // namespace
BENCHMARK_MAIN();
