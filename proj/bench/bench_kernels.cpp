// Compares the OpenMP sensing-risk engine against the serial reference
// kernels, and measures the Monte Carlo trial loop.
//
//   ./cams_bench                     # all kernels, current thread count
//   OMP_NUM_THREADS=1 ./cams_bench   # serial engine baseline

#include <benchmark/benchmark.h>

#include "cams/information.hpp"
#include "cams/montecarlo.hpp"
#include "cams/reference.hpp"
#include "cams/scenarios.hpp"
#include "cams/solver.hpp"

using namespace cams;

namespace {

struct DoaFixture {
    Scenario scenario;
    std::vector<ParamVec> samples;
    CovMatrix q;

    DoaFixture() {
        DoaConfig cfg;
        cfg.seed = 7;
        cfg.prior_samples = 512;
        scenario = build_doa(cfg);
        samples = draw_prior_samples(scenario);
        const int m = static_cast<int>(scenario.user.H.cols());
        q = CovMatrix::from_psd_unchecked(
            MatrixXcd((scenario.power / m) * MatrixXcd::Identity(m, m)));
    }
};

struct OfdmFixture {
    Scenario scenario;
    std::vector<ParamVec> samples;
    CovMatrix q;

    explicit OfdmFixture(bool hinted) {
        OfdmConfig cfg;
        cfg.k_sub = 64;
        cfg.alpha = 10.0;
        cfg.seed = 8;
        cfg.prior_samples = 32;
        scenario = build_ofdm(cfg);
        if (!hinted) {
            scenario.sensing.fim_theta_free = false;
            scenario.sensing.diagonal_dg = false;
        }
        samples = draw_prior_samples(scenario);
        q = CovMatrix::from_psd_unchecked(
            MatrixXcd((scenario.power / cfg.k_sub) * MatrixXcd::Identity(64, 64)));
    }
};

const DoaFixture& doa() {
    static DoaFixture f;
    return f;
}

void bm_doa_ecrb_engine(benchmark::State& state) {
    const auto& f = doa();
    EcrbObjective ecrb(make_fim_cache(f.scenario, f.samples), f.scenario.weights.a);
    for (auto _ : state) benchmark::DoNotOptimize(ecrb.value(f.q.matrix()));
}
BENCHMARK(bm_doa_ecrb_engine);

void bm_doa_ecrb_reference(benchmark::State& state) {
    const auto& f = doa();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ref::ecrb_objective(f.scenario.sensing, f.scenario.weights.a, f.samples, f.q));
}
BENCHMARK(bm_doa_ecrb_reference);

void bm_doa_gradient_engine(benchmark::State& state) {
    const auto& f = doa();
    EcrbObjective ecrb(make_fim_cache(f.scenario, f.samples), f.scenario.weights.a);
    for (auto _ : state) benchmark::DoNotOptimize(ecrb.gradient(f.q.matrix()));
}
BENCHMARK(bm_doa_gradient_engine);

void bm_doa_gradient_reference(benchmark::State& state) {
    const auto& f = doa();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ref::ecrb_gradient(f.scenario.sensing, f.scenario.weights.a, f.samples, f.q));
}
BENCHMARK(bm_doa_gradient_reference);

void bm_ofdm_ecrb_hinted(benchmark::State& state) {
    static OfdmFixture f(true);
    EcrbObjective ecrb(make_fim_cache(f.scenario, f.samples), f.scenario.weights.a);
    for (auto _ : state) benchmark::DoNotOptimize(ecrb.value(f.q.matrix()));
}
BENCHMARK(bm_ofdm_ecrb_hinted);

void bm_ofdm_ecrb_generic(benchmark::State& state) {
    static OfdmFixture f(false);
    EcrbObjective ecrb(make_fim_cache(f.scenario, f.samples), f.scenario.weights.a);
    for (auto _ : state) benchmark::DoNotOptimize(ecrb.value(f.q.matrix()));
}
BENCHMARK(bm_ofdm_ecrb_generic);

void bm_ofdm_ecrb_reference(benchmark::State& state) {
    static OfdmFixture f(false);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ref::ecrb_objective(f.scenario.sensing, f.scenario.weights.a, f.samples, f.q));
}
BENCHMARK(bm_ofdm_ecrb_reference);

void bm_mc_trials(benchmark::State& state) {
    OfdmConfig cfg;
    cfg.k_sub = 4;
    cfg.alpha = 10.0;
    cfg.seed = 9;
    cfg.prior_samples = 4;
    const Scenario sc = build_ofdm(cfg);
    const MinMseResult sens = min_achievable_mse(sc);
    McRunConfig mc;
    mc.n_block = 64;
    mc.trials = static_cast<int>(state.range(0));
    mc.delta_band = 0.8;
    mc.codebook_size = 8;
    mc.concentration_trials = 10;
    for (auto _ : state) benchmark::DoNotOptimize(run_mse_experiment(sc, sens.q, mc));
}
BENCHMARK(bm_mc_trials)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
