#include <benchmark/benchmark.h>

#include "agils/inner.hpp"
#include "agils/prox.hpp"
#include "agils/rng.hpp"
#include "agils/sgl.hpp"
#include "agils/solver.hpp"
#include "agils/toy.hpp"

using namespace agils;

namespace {

Vector random_vector(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

void BM_SoftThreshold(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Vector v = random_vector(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(soft_threshold(v, 0.3));
}
BENCHMARK(BM_SoftThreshold)->Arg(300)->Arg(1500);

void BM_SglProx(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const GroupStructure g = GroupStructure::equal(m, 5);
  const Vector v = random_vector(m, 2);
  const Vector w = Vector::Constant(5, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(prox_sparse_group_lasso(v, g, w, 0.2));
}
BENCHMARK(BM_SglProx)->Arg(300)->Arg(1500);

void BM_InnerSolveSgl(benchmark::State& state) {
  const auto method = static_cast<InnerMethod>(state.range(0));
  const SglInstance inst = make_sgl(3, {200, 200, 200, 300, 3.0});
  const Vector x = Vector::Constant(6, 0.1);
  const Vector y = Vector::Ones(300);
  const double gamma = 1.0 / 300.0;
  const double eta = prox_ll_step(inst.constants(), gamma);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_prox_ll(inst, x, y, gamma, eta, 1e-8, y, method, 100000));
  }
  state.SetLabel(std::string(to_string(method)));
}
BENCHMARK(BM_InnerSolveSgl)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_AgilsToy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ToyInstance toy = make_toy(n);
  AgilsConfig cfg = toy_default_config(n);
  cfg.record_timing = false;
  SolveHooks hooks;
  hooks.metric = [&toy](const Vector& x, const Vector& y) { return toy_error(toy, x, y); };
  for (auto _ : state) benchmark::DoNotOptimize(agils_solve(toy, cfg, toy.default_init(), hooks));
}
BENCHMARK(BM_AgilsToy)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_AgilsIterationSgl(benchmark::State& state) {
  const SglInstance inst = make_sgl(4, {200, 200, 200, 300, 3.0});
  AgilsConfig cfg = sgl_default_config(300);
  cfg.max_outer = 50;
  cfg.record_timing = false;
  for (auto _ : state) benchmark::DoNotOptimize(agils_solve(inst, cfg, inst.default_init()));
  state.SetItemsProcessed(state.iterations() * cfg.max_outer);
}
BENCHMARK(BM_AgilsIterationSgl)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
