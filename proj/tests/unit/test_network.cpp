#include <doctest.h>

#include <cmath>

#include "contagion/errors.hpp"
#include "contagion/network.hpp"
#include "contagion/rng.hpp"
#include "fixtures.hpp"

using namespace contagion;

TEST_CASE("net liabilities sum obligations minus receivables") {
    const auto net = fixtures::from_rows({{0, 1, 2}, {3, 0, 0}, {0, 4, 0}}, 0.5, 2.0);
    // 2 * (owed + societal - owed to the bank)
    CHECK(net_liability(net, 0) == doctest::Approx(2.0 * (3.0 + 0.5 - 3.0)));
    CHECK(net_liability(net, 1) == doctest::Approx(2.0 * (3.0 + 0.5 - 5.0)));
    CHECK(net_liability(net, 2) == doctest::Approx(2.0 * (4.0 + 0.5 - 2.0)));
    const auto all = net_liabilities(net);
    CHECK(all[1] == doctest::Approx(-3.0));
    CHECK(net_liabilities(fixtures::three_bank())[0] == doctest::Approx(1.0));
}

TEST_CASE("network validation") {
    auto net = fixtures::from_rows({{0, 1}, {1, 0}}, 1.0);
    CHECK_NOTHROW(net.validate());
    net.rates(0, 0) = 1.0;
    CHECK_THROWS_AS(net.validate(), ValidationError);
    net = fixtures::from_rows({{0, -1}, {1, 0}}, 1.0);
    CHECK_THROWS_AS(net.validate(), ValidationError);
    net = fixtures::from_rows({{0, 1}, {1, 0}}, 1.0);
    net.societal.push_back(1.0);
    CHECK_THROWS_AS(net.validate(), ValidationError);
}

TEST_CASE("rank factorization reconstructs the rates") {
    const auto net = fixtures::three_bank();
    const auto fac = rank_factorize(net);
    CHECK(fac.k == 3);
    CHECK((fac.U * fac.V - 3.0 * net.rates).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(factorization_residual(net, fac) < 1e-12);
    for (std::size_t c = 0; c < fac.k; ++c) {
        Eigen::Index r = 0;
        while (std::abs(fac.U(r, static_cast<Eigen::Index>(c))) < 1e-12) ++r;
        CHECK(fac.U(r, static_cast<Eigen::Index>(c)) > 0.0);
    }
}

TEST_CASE("rank of an outer product is one") {
    LiabilityNetwork net;
    Eigen::VectorXd c(4), d(4);
    c << 1, 0, 0, 0;
    d << 0, 2, 5, 1;
    net.rates = c * d.transpose();
    net.societal.assign(4, 1.0);
    const auto fac = rank_factorize(net);
    CHECK(fac.k == 1);
    // factors carry n lambda
    CHECK(fac.singular_values[0] == doctest::Approx(4.0 * d.norm()));
}

TEST_CASE("the reduced core-periphery matrix has rank four and the full one more") {
    CHECK(rank_factorize(fixtures::core_periphery_reduced()).k == 4);
    CHECK(rank_factorize(fixtures::core_periphery_full()).k > 4);
}

TEST_CASE("block matrix layout") {
    const auto net = build_block_matrix(fixtures::concrete_blocks());
    REQUIRE(net.size() == 10);
    CHECK(net.rates(0, 1) == 15.0);
    CHECK(net.rates(1, 0) == 45.0);
    CHECK(net.rates(1, 2) == 3.0);
    CHECK(net.rates(0, 2) == 0.0);
    CHECK(net.rates(2, 0) == 5.0);
    CHECK(net.rates(9, 1) == 3.0);
    CHECK(net.rates(2, 3) == 0.0);
    CHECK(net.societal[5] == 1.0);
    CHECK(rank_factorize(net).k == 4);
}

TEST_CASE("scaling keeps rank and multiplies size") {
    const auto base = build_block_matrix(fixtures::concrete_blocks());
    const auto scaled = scale_network(base, 3, 2);
    CHECK(scaled.size() == 30);
    CHECK(rank_factorize(scaled).k == 4);
    const auto origin = scaled_origin(10, 3, 2);
    REQUIRE(origin.size() == 30);
    CHECK(origin[0] == 0);
    CHECK(origin[1] == 1);
    CHECK(origin[2] == 0);
    CHECK(origin[6] == 2);
    CHECK_THROWS_AS(scale_network(base, 0), ValidationError);
}

TEST_CASE("type noise preserves rank") {
    const auto base = build_block_matrix(fixtures::concrete_blocks());
    const auto thetas = sample_noise(NoiseSpec::uniform(0.3, 11), base.size(), kThetaStream);
    for (double t : thetas) CHECK(std::abs(t) <= 0.3);
    CHECK(rank_factorize(apply_type_noise(base, thetas)).k == 4);
    CHECK(sample_noise(NoiseSpec::uniform(0.3, 11), 5, kThetaStream) ==
          sample_noise(NoiseSpec::uniform(0.3, 11), 5, kThetaStream));
}

TEST_CASE("noise spec validation") {
    CHECK_THROWS_AS(NoiseSpec::uniform(1.5, 0).validate(), ValidationError);
    CHECK_THROWS_AS(NoiseSpec::discrete({0.1, 0.2}, {0.5, 0.4}, 0).validate(), ValidationError);
    CHECK(NoiseSpec::discrete({-0.1, 0.3}, {0.5, 0.5}, 0).mean() == doctest::Approx(0.1));
}

TEST_CASE("atlas of the concrete block network") {
    const auto atlas = core_periphery_atlas(fixtures::concrete_blocks());
    CHECK(atlas.num_types() == 4);
    CHECK(atlas.base_size() == 10);
    CHECK(atlas.weights[0] == doctest::Approx(0.1));
    CHECK(atlas.weights[3] == doctest::Approx(0.4));
    CHECK(atlas.labels[9] == 3);
    const auto mf = mean_field_exposures(atlas);
    const auto eff = effective_exposures(atlas, 10);
    // aggregate exposure of group 1 onto core bank 1 is four members at rate 5
    CHECK(eff(2, 0) == doctest::Approx(20.0));
    CHECK(mf(2, 0) * 10.0 * atlas.weights[0] == doctest::Approx(eff(2, 0)));
    CHECK(mf.minCoeff() >= 0.0);
}

TEST_CASE("atlas factorization reproduces the scaled network") {
    const auto spec = fixtures::concrete_blocks();
    const auto base = core_periphery_atlas(spec);
    const std::vector<double> thetas(20, 0.0);
    const auto expanded = expand_atlas(base, 2, 2, thetas);
    const auto fac = atlas_factorization(expanded);
    const Eigen::MatrixXd approx = fac.U * fac.V;
    const auto scaled = scale_network(build_block_matrix(spec), 2, 2);
    CHECK((approx - 20.0 * scaled.rates).cwiseAbs().maxCoeff() < 1e-9);
}
