#include <benchmark/benchmark.h>

#include "formfind/element_forces.hpp"
#include "formfind/functionals.hpp"
#include "formfind/geometry.hpp"
#include "formfind/scenarios.hpp"
#include "formfind/solver.hpp"

using namespace formfind;

namespace {

const std::vector<Vec3> kTet{{1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {0.1, 0.2, 1}};

void BM_TetGeometry(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(element_geometry(std::span<const Vec3>(kTet.data(), 4), ElementKind::tetrahedron));
    }
}
BENCHMARK(BM_TetGeometry);

void BM_TetOmega(benchmark::State& state) {
    const auto g = element_geometry(std::span<const Vec3>(kTet.data(), 4), ElementKind::tetrahedron);
    const Eigen::MatrixXd rest = 0.9 * g.metric_block();
    for (auto _ : state) {
        const auto grads = local_grad_metric(g);
        const auto stress = constitutive_linear(g, rest, 50.0);
        benchmark::DoNotOptimize(element_omega_local(g, stress, grads));
    }
}
BENCHMARK(BM_TetOmega);

void BM_AssembleOmega(benchmark::State& state) {
    const Model m = generate({ScenarioKind::cantilever, {{"length_divisions", static_cast<double>(state.range(0))}}}).model;
    const Layout layout(m);
    const Eigen::VectorXd x = gather_positions(m, layout.dofs());
    for (auto _ : state) benchmark::DoNotOptimize(assemble_omega(m, layout, x));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.elements.size()));
}
BENCHMARK(BM_AssembleOmega)->Arg(12)->Arg(48);

void BM_EvalPiCableNet(benchmark::State& state) {
    const Model m = generate({ScenarioKind::cable_net, {}}).model;
    const Layout layout(m);
    const Eigen::VectorXd x = gather_positions(m, layout.dofs());
    for (auto _ : state) benchmark::DoNotOptimize(eval_pi(m, layout, x));
}
BENCHMARK(BM_EvalPiCableNet);

void BM_SimplexStep(benchmark::State& state) {
    Relaxation relax(generate({ScenarioKind::simplex_tensegrity, {}}).model);
    relax.randomize(1, 2.5);
    for (auto _ : state) relax.step();
}
BENCHMARK(BM_SimplexStep);

}  // namespace

BENCHMARK_MAIN();
