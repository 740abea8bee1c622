#include <algorithm>
#include <bit>
#include <cmath>

#include "contagion/errors.hpp"
#include "contagion/finite_sim.hpp"

namespace contagion {

namespace {

// Distance of bank j after an extra loss (money) arriving at time t.
double post_distance(const SystemState& s, std::size_t j, double extra, const FeedbackMap& map, double g) {
    if (extra == 0.0 || g == 0.0) return s.X[j];
    if (std::isinf(s.X[j])) return s.free[j] - map(s.feedback_integrals[j] + g * extra);
    return s.X[j] - map.increment(s.feedback_integrals[j], g * extra);
}

}  // namespace

std::vector<std::size_t> CascadeReport::defaulted() const {
    std::vector<std::size_t> out;
    for (const auto& r : rounds) out.insert(out.end(), r.begin(), r.end());
    std::sort(out.begin(), out.end());
    return out;
}

double theta_shift(double t, double jump, const Eigen::VectorXd& v, const SystemState& state,
                   const FeedbackMap& map, const DecayFn& decay) {
    if (jump < 0.0) throw ValidationError("theta_shift needs a nonnegative jump");
    double prior = 0.0;
    for (Eigen::Index l = 0; l < v.size(); ++l) prior += v(l) * state.channel_integrals[static_cast<std::size_t>(l)];
    return map.increment(prior, decay(t) * jump);
}

double xi_map(double t, const std::vector<double>& jumps, const Eigen::VectorXd& target_v,
              const SystemState& state, const RankFactorization& fac, const FeedbackSpec& feedback) {
    const std::size_t n = state.size();
    const double g = feedback.decay(t);
    Eigen::VectorXd channel = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fac.k));
    for (std::size_t j = 0; j < n; ++j) {
        if (!state.alive[j]) continue;
        if (post_distance(state, j, jumps[j], feedback.map_for(j), g) <= 0.0) channel += fac.U.row(j).transpose();
    }
    return target_v.dot(channel) / static_cast<double>(n);
}

CascadeReport resolve_cascade(const SystemState& state, const RankFactorization& fac, const FeedbackSpec& feedback) {
    const std::size_t n = state.size();
    CascadeReport report;
    report.t = state.t;
    std::vector<std::size_t> round;
    for (std::size_t j = 0; j < n; ++j)
        if (state.alive[j] && state.X[j] <= 0.0) round.push_back(j);
    if (round.empty()) return report;

    const double g = feedback.decay(state.t);
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<char> in_cascade(n, 0);
    Eigen::VectorXd channel = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fac.k));
    std::vector<double> delta(n, 0.0);

    while (!round.empty()) {
        for (std::size_t j : round) {
            in_cascade[j] = 1;
            channel += inv_n * fac.U.row(j).transpose();
        }
        for (std::size_t i = 0; i < n; ++i) delta[i] = std::max(delta[i], fac.V.col(i).dot(channel));
        report.rounds.push_back(round);
        report.round_jumps.push_back(delta);
        if (report.rounds.size() > n) throw NumericalError("cascade exceeded n rounds");

        round.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (!state.alive[j] || in_cascade[j]) continue;
            if (post_distance(state, j, delta[j], feedback.map_for(j), g) <= 0.0) round.push_back(j);
        }
    }
    report.final_jumps = delta;
    report.channel_jumps.assign(channel.data(), channel.data() + channel.size());
    return report;
}

std::vector<std::size_t> greatest_clearing_oracle(const SystemState& state, const LiabilityNetwork& net,
                                                  const FeedbackSpec& feedback) {
    const std::size_t n = state.size();
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < n; ++j)
        if (state.alive[j]) candidates.push_back(j);
    if (candidates.size() > 20) throw ValidationError("clearing oracle refuses more than 20 alive banks");

    const double g = feedback.decay(state.t);
    const std::size_t a = candidates.size();
    std::uint32_t best = 0;
    int best_count = -1;
    std::vector<double> extra(n);
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << a); ++mask) {
        const int count = std::popcount(mask);
        if (best_count >= 0 && count >= best_count) continue;
        std::fill(extra.begin(), extra.end(), 0.0);
        for (std::size_t p = 0; p < a; ++p) {
            if (!(mask >> p & 1U)) continue;
            const std::size_t j = candidates[p];
            for (std::size_t i = 0; i < n; ++i) extra[i] += net.rates(j, i);
        }
        bool consistent = true;
        for (std::size_t p = 0; p < a && consistent; ++p) {
            const std::size_t j = candidates[p];
            const bool defaults = post_distance(state, j, extra[j], feedback.map_for(j), g) <= 0.0;
            consistent = defaults == static_cast<bool>(mask >> p & 1U);
        }
        if (consistent) {
            best = mask;
            best_count = count;
        }
    }
    if (best_count < 0) throw NumericalError("clearing oracle found no consistent default set");
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < a; ++p)
        if (best >> p & 1U) out.push_back(candidates[p]);
    return out;
}

}  // namespace contagion
