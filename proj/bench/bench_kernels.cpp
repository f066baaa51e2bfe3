// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "mcf/flow.hpp"
#include "mcf/geometry.hpp"
#include "mcf/immersion.hpp"

using namespace mcf;

namespace {

Immersion sphere(int n, int res) {
  const SpaceForm H(-1.0, n + 1);
  const ParamDomain domain{n == 2 ? Topology::sphere2 : Topology::sphere3, res};
  return make_geodesic_sphere(H, domain, H.default_center(), 0.5);
}

Exec exec_of(const benchmark::State& state) { return state.range(2) ? Exec::parallel : Exec::serial; }

void BM_mean_curvature_field(benchmark::State& state) {
  const Immersion imm = sphere(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::vector<CurvatureSample> out(imm.grid().size());
  for (auto _ : state) {
    mean_curvature_field(imm, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(imm.grid().interior().size()));
}

void BM_rk4_step(benchmark::State& state) {
  const Immersion imm = sphere(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    Immersion next = step(imm, 1e-6, Integrator::rk4, exec_of(state));
    benchmark::DoNotOptimize(next.coords().data());
  }
}

void BM_surface_geometry(benchmark::State& state) {
  const Immersion imm = sphere(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    SurfaceGeometry sg(imm, exec_of(state));
    benchmark::DoNotOptimize(&sg);
  }
}

// Arguments: intrinsic dimension, resolution, parallel.
void kernel_args(benchmark::internal::Benchmark* b) {
  for (int parallel : {0, 1}) {
    b->Args({2, 32, parallel});
    b->Args({2, 64, parallel});
    b->Args({3, 16, parallel});
  }
  b->ArgNames({"n", "res", "omp"})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_mean_curvature_field)->Apply(kernel_args);
BENCHMARK(BM_rk4_step)->Apply(kernel_args);
BENCHMARK(BM_surface_geometry)->Apply(kernel_args);

BENCHMARK_MAIN();
