#include <benchmark/benchmark.h>

#include <random>

#include "contagion/finite_sim.hpp"
#include "contagion/mean_field.hpp"
#include "contagion/network.hpp"

using namespace contagion;

namespace {

LiabilityNetwork random_network(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LiabilityNetwork net;
    const auto N = static_cast<Eigen::Index>(n);
    net.rates = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            if (i != j && unit(eng) < 0.3) net.rates(i, j) = unit(eng);
    net.societal.assign(n, 1.0);
    return net;
}

void BM_RankFactorize(benchmark::State& state) {
    const auto net = random_network(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(rank_factorize(net));
}
BENCHMARK(BM_RankFactorize)->Arg(10)->Arg(100)->Arg(400);

void BM_ResolveCascade(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto net = random_network(n, 2);
    const auto fac = rank_factorize(net);
    FeedbackSpec fb;
    fb.maps = {FeedbackMap::log1p_scaled(1.0)};
    fb.decay = DecayFn::linear_decay(1.0);
    SystemState s;
    s.t = 0.5;
    s.X.assign(n, 0.05);
    s.X[0] = 0.0;
    s.free = s.X;
    s.alive.assign(n, 1);
    s.default_times.assign(n, kNever);
    s.losses.assign(fac.k, 0.0);
    s.channel_integrals.assign(fac.k, 0.0);
    s.feedback_integrals.assign(n, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(resolve_cascade(s, fac, fb));
}
BENCHMARK(BM_ResolveCascade)->Arg(10)->Arg(100);

void BM_SimulateNetwork(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const auto net = random_network(n, 3);
    const auto lbar = net_liabilities(net);
    std::vector<BankParams> params(n);
    for (std::size_t i = 0; i < n; ++i) {
        params[i].sigma = PiecewiseConstant(0.3);
        params[i].x0 = lbar[i] > 0.0 ? 1.5 * lbar[i] : 1.0;
    }
    MarketParams market;
    market.rho = 0.5;
    market.recovery = 0.1;
    const auto fac = rank_factorize(net);
    SimConfig cfg;
    cfg.record_paths = false;
    for (auto _ : state) {
        cfg.seed++;
        benchmark::DoNotOptimize(simulate(net, params, market, cfg, &fac));
    }
}
BENCHMARK(BM_SimulateNetwork)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_MeanFieldStep(benchmark::State& state) {
    MixtureSpec spec;
    for (int l = 0; l < 4; ++l) {
        MixtureType t;
        t.weight = 0.25;
        t.drift = PiecewiseConstant(-0.1);
        t.vol = PiecewiseConstant(0.4);
        t.feedback = FeedbackMap::log1p_scaled(0.3);
        t.initial = InitialProfile::gaussian(0.8, 0.15);
        spec.types.push_back(t);
    }
    spec.exposures = Eigen::MatrixXd::Constant(4, 4, 0.05);
    spec.rho = 0.3;
    MFConfig cfg;
    cfg.dx = 1.0 / static_cast<double>(state.range(0));
    const MeanFieldModel model(spec, cfg);
    DensityField field = model.initial_state();
    for (auto _ : state) {
        DensityField copy = field;
        benchmark::DoNotOptimize(model.step(copy, 0.0));
    }
}
BENCHMARK(BM_MeanFieldStep)->Arg(50)->Arg(100)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
