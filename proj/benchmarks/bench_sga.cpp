#include "sga/assoc.hpp"
#include "sga/eigencore.hpp"
#include "sga/kernels.hpp"
#include "sga/simulate.hpp"
#include "sga/standardize.hpp"

#include <benchmark/benchmark.h>

namespace
{

sga::GenotypeMatrix panel(int n, int p)
{
    return sga::gen_homogeneous(n, p, 20240317);
}

void BM_SpectralWeights(benchmark::State& state)
{
    const auto n = static_cast<int>(state.range(0));
    const auto p = static_cast<int>(state.range(1));
    const sga::StandardizedMatrix x = sga::standardize(panel(n, p), true);
    for (auto _ : state)
    {
        sga::WeightMatrix w = sga::spectral_weights(x);
        benchmark::DoNotOptimize(w.degrees.sum());
    }
}
BENCHMARK(BM_SpectralWeights)->Args({100, 1000})->Args({200, 2000});

void BM_LaplacianEigendecomposition(benchmark::State& state)
{
    const auto n = static_cast<int>(state.range(0));
    const sga::StandardizedMatrix x = sga::standardize(panel(n, 10 * n), true);
    const sga::WeightMatrix w = sga::spectral_weights(x);
    const Eigen::MatrixXd lap = sga::normalized_laplacian(w);
    for (auto _ : state)
    {
        sga::Spectrum spec = sga::eigendecompose(lap, sga::SpectrumSource::laplacian);
        benchmark::DoNotOptimize(spec.eigenvalues.sum());
    }
}
BENCHMARK(BM_LaplacianEigendecomposition)->Arg(100)->Arg(200)->Arg(400);

void BM_LogisticScan(benchmark::State& state)
{
    const auto n = static_cast<int>(state.range(0));
    sga::StructuredPanel sp = sga::gen_structured(3, 0.05, n, 200, 7);
    sga::ScenarioSpec spec;
    spec.cluster_prob = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    spec.case_prob = {0.3, 0.5, 0.7};
    spec.seed = 11;
    sp.genotypes.phenotype = sga::assign_phenotypes(sp.labels, spec);
    for (auto _ : state)
    {
        auto results =
            sga::assoc_scan(sp.genotypes, sga::AssocMethod::uncorrected, sga::AssocScanContext{});
        benchmark::DoNotOptimize(results.size());
    }
}
BENCHMARK(BM_LogisticScan)->Arg(200)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
