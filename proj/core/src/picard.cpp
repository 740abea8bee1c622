#include <algorithm>
#include <cmath>

#include "contagion/errors.hpp"
#include "contagion/mean_field.hpp"

namespace contagion {

PicardResult MeanFieldModel::picard() const {
    if (spec_.rho != 0.0) throw ValidationError("the Picard solver requires rho = 0");
    const std::size_t L = num_types(), Q = num_thetas(), N = steps_;

    // One application of the loss map: evolve every subtype under the feedback
    // implied by the candidate loss paths, read off the weighted absorbed mass.
    auto gamma = [&](const std::vector<std::vector<double>>& candidate) {
        std::vector<std::vector<double>> Z(L, std::vector<double>(N + 1, 0.0));
        for (std::size_t n = 0; n < N; ++n) {
            const double g = spec_.decay(static_cast<double>(n + 1) * dt_);
            for (std::size_t l = 0; l < L; ++l) {
                double inc = 0.0;
                for (std::size_t i = 0; i < L; ++i)
                    inc += spec_.exposures(i, l) * (candidate[i][n + 1] - candidate[i][n]);
                Z[l][n + 1] = Z[l][n] + g * inc;
            }
        }
        DensityField state = initial_state();
        std::vector<std::vector<double>> out(L, std::vector<double>(N + 1, 0.0));
        for (std::size_t n = 0; n < N; ++n) {
            const double t0 = static_cast<double>(n) * dt_, t1 = t0 + dt_, mid = 0.5 * (t0 + t1);
            for (std::size_t l = 0; l < L; ++l) {
                const auto& type = spec_.types[l];
                const double sigma = type.vol(mid);
                const double D = 0.5 * sigma * sigma;
                const double b = type.drift.integral(t0, t1) / dt_;
                for (std::size_t q = 0; q < Q; ++q) {
                    const double scale = 1.0 + spec_.theta.nodes[q];
                    auto& v = state.values[l * Q + q];
                    double absorbed = absorb_node0(v) + diffuse(v, D, b);
                    const double shift = type.feedback.increment(scale * Z[l][n], scale * (Z[l][n + 1] - Z[l][n]));
                    absorbed += shift_left(v, shift) + absorb_node0(v);
                    state.absorbed[l * Q + q] += absorbed;
                }
            }
            const auto w = weighted_losses(state);
            for (std::size_t l = 0; l < L; ++l) out[l][n + 1] = w[l];
        }
        return out;
    };

    PicardResult res;
    res.times.resize(N + 1);
    for (std::size_t n = 0; n <= N; ++n) res.times[n] = static_cast<double>(n) * dt_;
    std::vector<std::vector<double>> current = gamma(std::vector<std::vector<double>>(L, std::vector<double>(N + 1, 0.0)));
    for (std::size_t k = 0; k < config_.picard_cap; ++k) {
        auto next = gamma(current);
        double residual = 0.0;
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t n = 0; n <= N; ++n) residual = std::max(residual, std::abs(next[l][n] - current[l][n]));
        res.residuals.push_back(residual);
        current = std::move(next);
        res.iterations = k + 1;
        if (residual < config_.picard_tol) {
            res.converged = true;
            break;
        }
    }
    res.losses = std::move(current);
    return res;
}

}  // namespace contagion
