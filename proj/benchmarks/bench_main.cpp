#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "latgauge/hamiltonian.hpp"
#include "latgauge/hilbert.hpp"
#include "latgauge/spectra.hpp"

using namespace latgauge;

namespace {

std::vector<double> random_vector(std::uint64_t n) {
  std::mt19937_64 rng(0);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

GaugeStructure cyclic(int n) { return GaugeStructure(make_cyclic_group(n)); }

// Z2 on [L,L]; L = 2, 3.
void BM_MatrixFreeApply(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const LatticeHamiltonian h(build_lattice({L, L}), link_operators(cyclic(2)), CouplingParams::from_g(1.0));
  const auto v = random_vector(h.basis().dimension());
  std::vector<double> out(v.size());
  for (auto _ : state) {
    h.apply(v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_MatrixFreeApply)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SparseApply(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const LatticeHamiltonian h(build_lattice({L, L}), link_operators(cyclic(2)), CouplingParams::from_g(1.0));
  const auto op = h.full_operator();
  const auto v = random_vector(op.dimension());
  std::vector<double> out(v.size());
  for (auto _ : state) {
    op.apply(v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_SparseApply)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

// Z_N on [2,2]; explicit (0) or implicit (1) projector.
void BM_Projector(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mode = state.range(1) == 0 ? ProjectorMode::kExplicit : ProjectorMode::kImplicit;
  const GaussSector sector(build_lattice({2, 2}), cyclic(n), {.mode = mode});
  const auto v = random_vector(sector.full_dimension());
  std::vector<double> out(v.size());
  for (auto _ : state) {
    sector.apply_projector(v, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Projector)->Args({2, 0})->Args({2, 1})->Args({4, 0})->Args({4, 1})->Unit(benchmark::kMicrosecond);

void BM_LanczosSector(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto geom = build_lattice({2, 2});
  const GaussSector sector(geom, cyclic(n), {.mode = ProjectorMode::kExplicit});
  const LatticeHamiltonian h(geom, link_operators(cyclic(n)), CouplingParams::from_g(1.0));
  const auto op = h.sector_operator(sector);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lowest_k(op, 6, 1e-10, 1).ground_energy);
  }
}
BENCHMARK(BM_LanczosSector)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_LanczosImplicit(benchmark::State& state) {
  const auto geom = build_lattice({3, 3});
  const GaussSector sector(geom, cyclic(2), {.mode = ProjectorMode::kImplicit});
  const LatticeHamiltonian h(geom, link_operators(cyclic(2)), CouplingParams::from_g(1.0));
  const auto full = h.full_operator();
  SolverOptions opts;
  opts.k = 2;
  opts.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lowest_k(projected_operator(full, sector), opts).ground_energy);
  }
}
BENCHMARK(BM_LanczosImplicit)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
