#pragma once

#include <cmath>
#include <vector>

#include "contagion/finite_sim.hpp"
#include "contagion/network.hpp"

namespace fixtures {

inline contagion::LiabilityNetwork from_rows(const std::vector<std::vector<double>>& rows, double societal,
                                             double horizon = 1.0) {
    contagion::LiabilityNetwork net;
    const auto n = static_cast<Eigen::Index>(rows.size());
    net.rates = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) net.rates(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    net.societal.assign(rows.size(), societal);
    net.horizon = horizon;
    return net;
}

inline contagion::LiabilityNetwork three_bank() {
    return from_rows({{0, 2, 2}, {2, 0, 2}, {2, 2, 0}}, 1.0);
}

inline contagion::BankParams three_bank_params() {
    contagion::BankParams p;
    p.x0 = 2.0 * std::exp(-1.0);
    p.mu = contagion::PiecewiseConstant(1.0);
    p.sigma = contagion::PiecewiseConstant(0.5);
    return p;
}

inline contagion::MarketParams three_bank_market() {
    contagion::MarketParams m;
    m.rho = std::sqrt(0.5);
    m.recovery = 0.1;
    return m;
}

// Ten-bank core-periphery reference matrices, societal obligation 1.
inline contagion::LiabilityNetwork core_periphery_full() {
    return from_rows(
        {{0, 15.01, 0, 0, 0, 0, 3.43, 2.87, 2.87, 2.80},
         {45.35, 0, 3.08, 2.36, 2.78, 2.80, 1.13, 0.94, 0.94, 0.92},
         {4.54, 2.23, 0, 0.04, 0, 0.05, 0.06, 0.05, 0.05, 0},
         {5.90, 2.90, 0, 0, 0, 0.06, 0.07, 0, 0, 0},
         {4.67, 2.29, 0.05, 0.04, 0, 0, 0, 0.05, 0, 0.05},
         {4.40, 2.16, 0.05, 0.04, 0, 0, 0.05, 0.05, 0.05, 0},
         {3.64, 4.47, 0, 0.04, 0, 0.05, 0, 0, 0, 0.05},
         {3.41, 4.18, 0, 0.04, 0.04, 0.04, 0.05, 0, 0, 0.04},
         {3.25, 3.99, 0, 0, 0, 0, 0.05, 0.04, 0, 0},
         {4.31, 5.29, 0, 0.05, 0, 0, 0, 0, 0, 0}},
        1.0);
}

inline contagion::LiabilityNetwork core_periphery_reduced() {
    return from_rows(
        {{0, 15.01, 0, 0, 0, 0, 3.43, 2.87, 2.87, 2.80},
         {45.35, 0, 3.08, 2.36, 2.78, 2.80, 1.13, 0.94, 0.94, 0.92},
         {4.54, 2.23, 0, 0, 0, 0, 0, 0, 0, 0},
         {5.90, 2.90, 0, 0, 0, 0, 0, 0, 0, 0},
         {4.67, 2.29, 0, 0, 0, 0, 0, 0, 0, 0},
         {4.40, 2.16, 0, 0, 0, 0, 0, 0, 0, 0},
         {3.64, 4.47, 0, 0, 0, 0, 0, 0, 0, 0},
         {3.41, 4.18, 0, 0, 0, 0, 0, 0, 0, 0},
         {3.25, 3.99, 0, 0, 0, 0, 0, 0, 0, 0},
         {4.31, 5.29, 0, 0, 0, 0, 0, 0, 0, 0}},
        1.0);
}

// Two core banks and two periphery groups of four.
inline contagion::BlockSpec concrete_blocks() {
    contagion::BlockSpec spec;
    spec.core = Eigen::MatrixXd(2, 2);
    spec.core << 0, 15, 45, 0;
    spec.groups.push_back({4, {0, 3}, {5, 2}});
    spec.groups.push_back({4, {3, 1}, {4, 3}});
    spec.societal_rate = 1.0;
    return spec;
}

}  // namespace fixtures
