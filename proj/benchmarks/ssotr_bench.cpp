#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "ssotr/dataset.hpp"
#include "ssotr/estimators.hpp"
#include "ssotr/kernel.hpp"
#include "ssotr/propensity.hpp"
#include "ssotr/simulation.hpp"

using namespace ssotr;

namespace {

SimConfig bench_config(Eigen::Index n, Eigen::Index unlabeled_n) {
    SimConfig cfg;
    cfg.n = n;
    cfg.unlabeled_n = unlabeled_n;
    cfg.p = 2;
    cfg.mc_truth_size = 10 * n;
    cfg.seed = 99;
    return cfg;
}

const Dataset& benchmark_data() {
    static const Dataset ds = generate_replication(bench_config(500, 5000), 0);
    return ds;
}

} // namespace

static void BM_PropensityFit(benchmark::State& state) {
    const Dataset& ds = benchmark_data();
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_propensity(ds));
    }
}
BENCHMARK(BM_PropensityFit);

static void BM_TransformedResponseFit(benchmark::State& state) {
    const Dataset& ds = benchmark_data();
    const PropensityFit prop = fit_propensity(ds);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_tr(ds, prop));
    }
}
BENCHMARK(BM_TransformedResponseFit);

static void BM_KernelPoint(benchmark::State& state) {
    const Dataset& ds = benchmark_data();
    KernelConfig config;
    config.bandwidth = 0.3;
    const QSurface surface = fit_surface(ds, config);
    Eigen::Index i = 0;
    for (auto _ : state) {
        const Eigen::VectorXd x = ds.unlabeled_x().col(i);
        benchmark::DoNotOptimize(surface.q(x, 1));
        i = (i + 1) % ds.unlabeled_count();
    }
}
BENCHMARK(BM_KernelPoint);

static void BM_BandwidthSelect(benchmark::State& state) {
    const Dataset ds = generate_replication(bench_config(200, 50), 0);
    const std::vector<double> grid = default_bandwidth_grid(ds.n(), ds.p());
    for (auto _ : state) {
        benchmark::DoNotOptimize(select_bandwidth(ds, 5, grid, 1, 1));
    }
}
BENCHMARK(BM_BandwidthSelect)->Unit(benchmark::kMillisecond);

static void BM_CrossFit(benchmark::State& state) {
    const Dataset ds = generate_replication(bench_config(300, 1000), 0);
    const PropensityFit prop = fit_propensity(ds);
    for (auto _ : state) {
        const FoldedSurfaces folded = fit_folded(ds, 0.3, 5, 1);
        benchmark::DoNotOptimize(fit_ss(ds, folded, prop));
    }
}
BENCHMARK(BM_CrossFit)->Unit(benchmark::kMillisecond);

static void BM_GenerateReplication(benchmark::State& state) {
    const SimConfig cfg = bench_config(500, 5000);
    int rep = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_replication(cfg, rep));
        rep = (rep + 1) % 1000;
    }
}
BENCHMARK(BM_GenerateReplication)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
