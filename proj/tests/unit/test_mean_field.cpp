#include <doctest.h>

#include <cmath>
#include <numeric>

#include "contagion/errors.hpp"
#include "contagion/mean_field.hpp"
#include "oracles.hpp"

using namespace contagion;

namespace {

MixtureSpec single_type(double drift, double vol, double mean, double sd) {
    MixtureSpec spec;
    MixtureType t;
    t.drift = PiecewiseConstant(drift);
    t.vol = PiecewiseConstant(vol);
    t.initial = InitialProfile::gaussian(mean, sd);
    spec.types.push_back(t);
    spec.exposures = Eigen::MatrixXd::Zero(1, 1);
    return spec;
}

MixtureSpec two_types(double c) {
    MixtureSpec spec;
    for (int l = 0; l < 2; ++l) {
        MixtureType t;
        t.weight = 0.5;
        t.drift = PiecewiseConstant(-0.2);
        t.vol = PiecewiseConstant(0.4);
        t.feedback = FeedbackMap::log1p_scaled(c);
        t.initial = InitialProfile::gaussian(0.4 + 0.2 * l, 0.15);
        spec.types.push_back(t);
    }
    spec.exposures = Eigen::MatrixXd(2, 2);
    spec.exposures << 0.1, 0.3, 0.2, 0.1;
    spec.decay = DecayFn::linear_decay(1.0);
    return spec;
}

}  // namespace

TEST_CASE("uniform theta quadrature") {
    const auto q = ThetaQuadrature::uniform(0.3, 3);
    const double total = std::accumulate(q.weights.begin(), q.weights.end(), 0.0);
    CHECK(total == doctest::Approx(1.0));
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        m1 += q.weights[k] * q.nodes[k];
        m2 += q.weights[k] * q.nodes[k] * q.nodes[k];
    }
    CHECK(std::abs(m1) < 1e-14);
    CHECK(m2 == doctest::Approx(0.09 / 3.0));
    CHECK(q.max_scale() == doctest::Approx(1.0 + q.nodes.back()));
    CHECK(ThetaQuadrature::dirac_zero().nodes == std::vector<double>{0.0});
}

TEST_CASE("initial profiles vanish at the boundary") {
    const auto v = InitialProfile::gaussian(0.5, 0.1).discretize(0.01, 200);
    CHECK(v[0] == 0.0);
    CHECK(v[50] > v[40]);
    const auto u = InitialProfile::uniform(0.2, 0.4).discretize(0.01, 100);
    CHECK(u[0] == 0.0);
    CHECK(u[30] > 0.0);
    CHECK(u[60] == 0.0);
}

TEST_CASE("asset-based initial density integrates to one") {
    const auto asset = AssetDensity::uniform(2.0, 4.0);
    const auto v = init_density(asset, 1.0, PiecewiseConstant(0.0), 1.0, 0.001, 2000);
    double mass = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) mass += 0.5 * 0.001 * (v[j - 1] + v[j]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("violating the stability bound is a numerical error") {
    MFConfig cfg;
    cfg.dx = 0.01;
    cfg.dt = 0.01;
    CHECK_THROWS_AS(MeanFieldModel(single_type(0.0, 0.4, 0.5, 0.1), cfg), NumericalError);
}

TEST_CASE("mixture validation") {
    auto spec = single_type(0.0, 0.4, 0.5, 0.1);
    spec.types[0].weight = 0.5;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.types[0].weight = 1.0;
    spec.exposures = Eigen::MatrixXd::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("feedback-free loss follows the first-passage law") {
    MFConfig cfg;
    cfg.dx = 0.01;
    const MeanFieldModel model(single_type(-0.3, 0.5, 0.5, 0.05), cfg);
    const MFOutput out = model.solve(std::uint64_t{0});
    double err = 0.0;
    for (std::size_t n = 0; n < out.times.size(); n += 20)
        err = std::max(err, std::abs(out.losses[0][n] - oracles::gaussian_start_cdf(0.5, 0.05, -0.3, 0.5, out.times[n], 801)));
    CHECK(err < 0.01);
    CHECK(out.jumps.empty());
    CHECK(out.max_conservation_error[0] < 1e-10);
}

TEST_CASE("losses are nondecreasing and bounded") {
    MFConfig cfg;
    cfg.dx = 0.02;
    auto spec = two_types(0.6);
    spec.rho = 0.3;
    const MeanFieldModel model(spec, cfg);
    const MFOutput out = model.solve(std::uint64_t{3});
    for (const auto& path : out.losses) {
        for (std::size_t n = 1; n < path.size(); ++n) CHECK(path[n] >= path[n - 1] - 1e-14);
        CHECK(path.back() <= 1.0);
    }
}

TEST_CASE("same common seed, same solution") {
    MFConfig cfg;
    cfg.dx = 0.02;
    auto spec = two_types(0.6);
    spec.rho = 0.5;
    const MeanFieldModel model(spec, cfg);
    CHECK(model.solve(std::uint64_t{8}).losses == model.solve(std::uint64_t{8}).losses);
    CHECK(model.solve(std::uint64_t{8}).losses != model.solve(std::uint64_t{9}).losses);
}

TEST_CASE("weak feedback passes the smallness check and stays continuous") {
    MFConfig cfg;
    cfg.dx = 0.02;
    const MeanFieldModel model(two_types(0.6), cfg);
    const CheckResult small = model.check_smallness();
    CHECK(small.pass);
    CHECK(small.margin > 0.0);
    const MFOutput out = model.solve(std::uint64_t{0});
    CHECK(out.jumps.empty());
    for (double inc : out.max_step_increment) CHECK(inc < out.explosion_threshold);
}

TEST_CASE("Picard iteration matches the stepper without common noise") {
    MFConfig cfg;
    cfg.dx = 0.02;
    const MeanFieldModel model(two_types(0.6), cfg);
    const PicardResult pic = model.picard();
    CHECK(pic.converged);
    const MFOutput out = model.solve(std::uint64_t{0});
    for (std::size_t l = 0; l < 2; ++l) CHECK(pic.losses[l].back() == doctest::Approx(out.weighted_losses[l].back()).epsilon(1e-6));
    for (std::size_t k = 1; k < pic.residuals.size(); ++k) CHECK(pic.residuals[k] < pic.residuals[k - 1]);
}

TEST_CASE("Picard refuses common noise") {
    auto spec = two_types(0.6);
    spec.rho = 0.2;
    MFConfig cfg;
    cfg.dx = 0.02;
    CHECK_THROWS_AS(MeanFieldModel(spec, cfg).picard(), ValidationError);
}

TEST_CASE("a strongly coupled pair jumps") {
    auto spec = two_types(0.9);
    spec.exposures << 0, 40, 40, 0;
    MFConfig cfg;
    cfg.dx = 0.02;
    const MeanFieldModel model(spec, cfg);
    CHECK_FALSE(model.check_smallness().pass);
    const MFOutput out = model.solve(std::uint64_t{0});
    REQUIRE_FALSE(out.jumps.empty());
    const auto& j = out.jumps[0];
    CHECK(j.cascade.jump);
    CHECK(j.loss_jumps[0] > 0.0);
    CHECK(j.loss_jumps[1] > 0.0);
    for (std::size_t k = 1; k < j.cascade.eps_jumps.size(); ++k)
        for (std::size_t l = 0; l < 2; ++l) CHECK(j.cascade.eps_jumps[k][l] <= j.cascade.eps_jumps[k - 1][l] + 1e-9);
}

TEST_CASE("initial decay diagnostic") {
    const auto v = InitialProfile::gaussian(0.5, 0.1).discretize(0.01, 200);
    const DecayFit fit = check_initial_decay(v, 0.01);
    CHECK(fit.C_star > 0.0);
}
