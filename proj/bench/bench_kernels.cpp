#include <cmath>
#include <span>
#include <vector>

#include <benchmark/benchmark.h>

#include <koba/domain.hpp>
#include <koba/geodesics.hpp>
#include <koba/kobayashi.hpp>
#include <koba/model_domain.hpp>
#include <koba/modulus.hpp>

using namespace koba;

namespace
{

Exec exec_of(const benchmark::State &state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void label(benchmark::State &state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_VerifyEmbedding(benchmark::State &state)
{
    const DomainPtr dom = make_ellipsoid({2.0, 1.0});
    const Modulus omega = Modulus::linear(2.0);
    const auto cert = select_parameters(*dom, omega, dom->neighborhood_radius(), 256);
    const ModelDomain model(omega, cert.alpha, cert.tau);
    const BoundaryPoint xi = make_boundary_point(*dom, RVec{0, 0, 1, 0});
    for (auto _ : state) {
        benchmark::DoNotOptimize(verify_embedding(*dom, xi, model, cert, 64, 129, exec_of(state)));
    }
    label(state);
}

void BM_TangentAngle(benchmark::State &state)
{
    const ModelDomain model(Modulus::log_family(1.0), 2.0, 0.25);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tangent_angle_check(model, 1000, exec_of(state)));
    }
    label(state);
}

void BM_EmpiricalModulus(benchmark::State &state)
{
    const auto f = [](std::span<const double> x) { return std::sqrt(std::abs(x[0])) + 0.5 * std::abs(x[1]); };
    const std::vector<double> c{0.0, 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(empirical_modulus(f, c, 1.0, 4000, 1, exec_of(state)));
    }
    label(state);
}

void BM_BracketMatrix(benchmark::State &state)
{
    const BracketEngine engine(make_ball(2));
    std::vector<RVec> a, b;
    for (int k = 0; k < 4; ++k) {
        a.push_back(RVec{0.1 * k, 0.2, -0.1, 0.05 * k});
        b.push_back(RVec{-0.2, 0.1 * k, 0.3, 0.0});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(bracket_matrix(engine, a, b, exec_of(state)));
    }
    label(state);
}

void BM_AlmostGeodesic(benchmark::State &state)
{
    const BracketEngine engine(make_ball(1));
    const NormalRay ray = make_normal_ray(engine.domain(), RVec{1, 0}, 0.5);
    const auto grid = uniform_time_grid(4, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(almost_geodesic_report(engine, ray, grid, exec_of(state)));
    }
    label(state);
}

} // namespace

BENCHMARK(BM_VerifyEmbedding)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TangentAngle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EmpiricalModulus)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BracketMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AlmostGeodesic)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
