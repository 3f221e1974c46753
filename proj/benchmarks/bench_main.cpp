#include "vemstokes/assembly.hpp"
#include "vemstokes/eigensolve.hpp"
#include "vemstokes/mesh.hpp"
#include "vemstokes/vemspace.hpp"

#include <benchmark/benchmark.h>

using namespace vemstokes;

namespace {

MeshFamily family_of(int64_t i)
{
    static const MeshFamily families[] = {MeshFamily::Tri, MeshFamily::Quad, MeshFamily::Hex, MeshFamily::Voronoi};
    return families[i];
}

void BM_LocalOperators(benchmark::State& state)
{
    const PolygonalMesh mesh = generate_mesh(family_of(state.range(0)), 8, DomainTag::UnitSquare, 1);
    VemParams p;
    p.k = static_cast<int>(state.range(1));
    int c = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_local_operators(mesh, c, p));
        c = (c + 1) % static_cast<int>(mesh.num_cells());
    }
    state.SetLabel(std::string(to_string(family_of(state.range(0)))));
}
BENCHMARK(BM_LocalOperators)->ArgsProduct({{0, 1, 2, 3}, {0, 1}});

void BM_Assembly(benchmark::State& state)
{
    const PolygonalMesh mesh = generate_mesh(MeshFamily::Tri, static_cast<int>(state.range(0)), DomainTag::UnitSquare);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_system(mesh, VemParams{}, BcMode::Mixed, 1));
    state.counters["cells"] = static_cast<double>(mesh.num_cells());
}
BENCHMARK(BM_Assembly)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ShiftInvertSolve(benchmark::State& state)
{
    const BcMode mode = state.range(1) == 0 ? BcMode::Mixed : BcMode::Rigid;
    const DomainTag domain = mode == BcMode::Mixed ? DomainTag::UnitSquare : DomainTag::SymSquare;
    const GlobalSystem sys =
        assemble_system(generate_mesh(MeshFamily::Tri, static_cast<int>(state.range(0)), domain), VemParams{}, mode);
    SolveOptions o;
    o.strategy = SolveStrategy::ShiftInvert;
    o.m = 6;
    for (auto _ : state) benchmark::DoNotOptimize(solve_spectrum(sys, o));
    state.counters["dofs"] = sys.n_free;
}
BENCHMARK(BM_ShiftInvertSolve)->ArgsProduct({{20, 40}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_DenseSolve(benchmark::State& state)
{
    const GlobalSystem sys = assemble_system(
        generate_mesh(MeshFamily::Quad, static_cast<int>(state.range(0)), DomainTag::UnitSquare), VemParams{},
        BcMode::Mixed);
    SolveOptions o;
    o.strategy = SolveStrategy::Dense;
    for (auto _ : state) benchmark::DoNotOptimize(solve_spectrum(sys, o));
    state.counters["dofs"] = sys.n_free;
}
BENCHMARK(BM_DenseSolve)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
