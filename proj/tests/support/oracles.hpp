#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "contagion/finite_sim.hpp"
#include "contagion/network.hpp"

namespace oracles {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(inf_{s<=t} (x + b s + sigma W_s) <= 0) for x > 0.
inline double first_passage_cdf(double x, double b, double sigma, double t) {
    if (x <= 0.0) return 1.0;
    if (t <= 0.0) return 0.0;
    const double s = sigma * std::sqrt(t);
    const double reflected = std::exp(-2.0 * b * x / (sigma * sigma));
    return normal_cdf((-x - b * t) / s) + reflected * normal_cdf((-x + b * t) / s);
}

// First-passage law averaged over a Gaussian start truncated to (0, inf).
inline double gaussian_start_cdf(double mean, double sd, double b, double sigma, double t, int points = 4001) {
    const double lo = std::max(0.0, mean - 10.0 * sd), hi = mean + 10.0 * sd;
    const double h = (hi - lo) / (points - 1);
    double num = 0.0, den = 0.0;
    for (int k = 0; k < points; ++k) {
        const double x = lo + h * k;
        const double w = (k == 0 || k == points - 1 ? 0.5 : 1.0) * std::exp(-0.5 * (x - mean) * (x - mean) / (sd * sd));
        num += w * first_passage_cdf(x, b, sigma, t);
        den += w;
    }
    return num / den;
}

// Random left-limit state of an Eisenberg-Noe-type system with n banks: past
// defaults recorded through per-bank loss weights r_j, consistent channel and
// feedback integrals, and distances scattered around the boundary.
struct RandomInstance {
    contagion::LiabilityNetwork net;
    contagion::RankFactorization fac;
    contagion::FeedbackSpec feedback;
    contagion::SystemState state;
};

inline RandomInstance random_instance(std::mt19937_64& eng, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomInstance inst;
    inst.net.rates = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double density = 0.3 + 0.7 * unit(eng);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && unit(eng) < density) inst.net.rates(i, j) = 3.0 * unit(eng);
    inst.net.societal.assign(n, 1.0);
    inst.net.horizon = 1.0;
    inst.fac = contagion::rank_factorize(inst.net);

    inst.feedback.decay = contagion::DecayFn::linear_decay(1.0);
    for (std::size_t i = 0; i < n; ++i) inst.feedback.maps.push_back(contagion::FeedbackMap::log1p_scaled(0.05 + 1.5 * unit(eng)));

    auto& s = inst.state;
    s.t = 0.9 * unit(eng);
    s.alive.assign(n, 1);
    s.default_times.assign(n, contagion::kNever);
    std::vector<double> r(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (unit(eng) < 0.15) {
            s.alive[j] = 0;
            s.default_times[j] = s.t * unit(eng);
            r[j] = 1.0 - s.default_times[j];
        }
    }
    const auto k = static_cast<Eigen::Index>(inst.fac.k);
    Eigen::VectorXd channel = Eigen::VectorXd::Zero(k);
    for (std::size_t j = 0; j < n; ++j) channel += r[j] / static_cast<double>(n) * inst.fac.U.row(static_cast<Eigen::Index>(j)).transpose();
    s.channel_integrals.assign(channel.data(), channel.data() + k);
    s.losses.assign(static_cast<std::size_t>(k), 0.0);
    s.feedback_integrals.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s.feedback_integrals[i] += r[j] * inst.net.rates(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    s.X.resize(n);
    s.free.resize(n);
    bool boundary = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = unit(eng);
        s.X[i] = u < 0.25 ? -0.05 * unit(eng) : (u < 0.35 ? 0.0 : 0.6 * unit(eng));
        if (s.alive[i] && s.X[i] <= 0.0) boundary = true;
        s.free[i] = s.X[i] + inst.feedback.maps[i](s.feedback_integrals[i]);
    }
    if (!boundary) {
        for (std::size_t i = 0; i < n; ++i)
            if (s.alive[i]) {
                s.X[i] = 0.0;
                s.free[i] = inst.feedback.maps[i](s.feedback_integrals[i]);
                break;
            }
    }
    return inst;
}

}  // namespace oracles
