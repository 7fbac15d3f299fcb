#include <benchmark/benchmark.h>

#include "dyksplit/engine.hpp"
#include "dyksplit/testkit.hpp"

using namespace dyksplit;

namespace {

ProblemSpec mixed_spec(std::size_t d) {
  Vector a(d, 0.5), lo(d, -1.0), hi(d, 1.0), n(d, 1.0);
  return make_spec(d, Vector(d, 1.5),
                   {make_quadratic(1.0, a), make_l1(0.1), make_box(lo, hi),
                    make_halfspace_block(n, 1.0)});
}

EngineConfig cyclic_cfg(const ProblemSpec& spec, bool shqp) {
  EngineConfig cfg;
  cfg.shqp_enabled = shqp;
  cfg.schedule = BlockSchedule::cyclic(spec.r() + (shqp ? 1 : 0));
  if (shqp) cfg.ctilde_policy = EngineConfig::CtildePolicy::HPlusRecentK;
  return cfg;
}

}  // namespace

static void BM_SweepMixed(benchmark::State& state) {
  const ProblemSpec spec = mixed_spec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    DykstraEngine eng(spec, cyclic_cfg(spec, false));
    for (int n = 0; n < 10; ++n) benchmark::DoNotOptimize(eng.sweep().n);
  }
}
BENCHMARK(BM_SweepMixed)->Arg(8)->Arg(128)->Arg(2048);

static void BM_SweepMixedShqp(benchmark::State& state) {
  const ProblemSpec spec = mixed_spec(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    DykstraEngine eng(spec, cyclic_cfg(spec, true));
    for (int n = 0; n < 10; ++n) benchmark::DoNotOptimize(eng.sweep().n);
  }
}
BENCHMARK(BM_SweepMixedShqp)->Arg(8)->Arg(128);

static void BM_ProjectHalfspaceIntersection(benchmark::State& state) {
  const std::size_t d = 16;
  std::vector<Halfspace> cuts;
  for (int k = 0; k < state.range(0); ++k) {
    Vector a(d, 0.0);
    a[static_cast<std::size_t>(k) % d] = 1.0;
    a[(static_cast<std::size_t>(k) + 1) % d] = 0.5;
    cuts.push_back(halfspace_from_point(a, Vector(d, -0.1)));
  }
  const Vector y(d, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_halfspace_intersection(y, cuts).first);
  }
}
BENCHMARK(BM_ProjectHalfspaceIntersection)->Arg(2)->Arg(4)->Arg(8);

static void BM_GeneratedInstanceRun(benchmark::State& state) {
  testkit::GeneratedInstance inst = testkit::generate(42);
  StopRule stop;
  stop.max_sweeps = 50;
  for (auto _ : state) {
    RunResult res =
        run_dykstra(inst.spec, cyclic_cfg(inst.spec, false), stop);
    benchmark::DoNotOptimize(res.sweeps);
  }
}
BENCHMARK(BM_GeneratedInstanceRun);

BENCHMARK_MAIN();
