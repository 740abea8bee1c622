#include <doctest.h>

#include <cmath>

#include "contagion/convergence.hpp"
#include "fixtures.hpp"

using namespace contagion;

TEST_CASE("loss distance of a path to itself is zero") {
    const std::vector<double> a = {0.0, 0.1, 0.3, 0.3, 0.6};
    CHECK(loss_distance(a, a, 0.01) == 0.0);
}

TEST_CASE("loss distance is bounded by the vertical gap") {
    const std::vector<double> a = {0.0, 0.1, 0.2, 0.3};
    const std::vector<double> b = {0.05, 0.15, 0.25, 0.35};
    CHECK(loss_distance(a, b, 0.5) == doctest::Approx(0.05));
}

TEST_CASE("loss distance prefers a small time shift over a large jump gap") {
    std::vector<double> a(100, 0.0), b(100, 0.0);
    for (std::size_t n = 50; n < 100; ++n) a[n] = 1.0;
    for (std::size_t n = 52; n < 100; ++n) b[n] = 1.0;
    const double d = loss_distance(a, b, 0.001);
    CHECK(d == doctest::Approx(0.002));
    CHECK(loss_distance(a, b, 0.001, 0.0012) == doctest::Approx(1.0));
}

TEST_CASE("log-log slope of a power law") {
    const std::vector<double> m = {4, 16, 64};
    std::vector<double> y;
    for (double x : m) y.push_back(3.0 * std::pow(x, -0.5));
    CHECK(loglog_slope(m, y) == doctest::Approx(-0.5));
}

TEST_CASE("identical networks give identical default times") {
    const auto net = fixtures::core_periphery_reduced();
    const auto lbar = net_liabilities(net);
    std::vector<BankParams> params;
    for (double l : lbar) {
        BankParams p;
        p.sigma = PiecewiseConstant(0.5);
        p.x0 = l > 0.0 ? 1.25 * l : 20.0;
        params.push_back(p);
    }
    const auto row = compare_full_reduced_once(net, net, params, fixtures::three_bank_market(), 1.0 / 500.0, 5);
    CHECK(row.norm_diff == 0.0);
    CHECK(row.survivor_agreement);
    CHECK(row.full_times == row.reduced_times);
}

TEST_CASE("small scaling study is reproducible and shrinks with m") {
    ScalingBase base;
    base.blocks.core = Eigen::MatrixXd::Zero(1, 1);
    TypeDynamics t;
    t.drift = PiecewiseConstant(-0.2);
    t.vol = PiecewiseConstant(0.4);
    t.initial = InitialProfile::gaussian(0.5, 0.1);
    base.types.push_back(t);
    base.mf.dx = 0.04;
    base.mf.dt = 1.0 / 500.0;
    ScalingConfig cfg;
    cfg.m_list = {4, 64};
    cfg.seeds_per_m = 8;
    cfg.seed = 1;
    const auto a = run_scaling_study(base, cfg);
    const auto b = run_scaling_study(base, cfg);
    REQUIRE(a.rows.size() == 16);
    for (std::size_t k = 0; k < a.rows.size(); ++k) CHECK(a.rows[k].distances == b.rows[k].distances);
    CHECK(a.summary[1].overall_mean < a.summary[0].overall_mean);
    CHECK(a.loglog_slope < 0.0);
}
