#include <algorithm>
#include <cmath>
#include <sstream>

#include "contagion/errors.hpp"
#include "contagion/mean_field.hpp"

namespace contagion {

namespace {

// Running integrals of the piecewise-linear interpolant of each subtype density.
class MassTable {
public:
    MassTable(const DensityField& state, double dx) : dx_(dx), values_(&state.values) {
        cum_.reserve(state.values.size());
        for (const auto& v : state.values) {
            std::vector<double> c(v.size(), 0.0);
            for (std::size_t j = 1; j < v.size(); ++j) c[j] = c[j - 1] + 0.5 * dx * (v[j - 1] + v[j]);
            cum_.push_back(std::move(c));
        }
    }

    // int_0^a of subtype s.
    double below(std::size_t s, double a) const {
        if (!(a > 0.0)) return 0.0;
        const auto& c = cum_[s];
        const auto& v = (*values_)[s];
        const double cells = a / dx_;
        const auto m = static_cast<std::size_t>(std::floor(cells));
        if (m + 1 >= v.size()) return c.back();
        const double al = cells - static_cast<double>(m);
        return c[m] + dx_ * (al * v[m] + 0.5 * al * al * (v[m + 1] - v[m]));
    }

private:
    double dx_;
    const std::vector<std::vector<double>>* values_;
    std::vector<std::vector<double>> cum_;
};

std::vector<double> xi_eval(const MeanFieldModel& model, const DensityField& state, const MassTable& table,
                            const std::vector<double>& z) {
    const auto& spec = model.spec();
    const std::size_t L = model.num_types(), Q = model.num_thetas();
    std::vector<double> source(L, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t q = 0; q < Q; ++q) {
            const double shift = model.theta_mf(state, state.t, i, q, std::max(0.0, z[i]));
            source[i] += spec.theta.weights[q] * (1.0 + spec.theta.nodes[q]) * table.below(i * Q + q, shift);
        }
    }
    std::vector<double> out(L, 0.0);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t i = 0; i < L; ++i) out[l] += spec.exposures(i, l) * source[i];
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

std::vector<double> MeanFieldModel::xi(const DensityField& state, const std::vector<double>& z) const {
    if (z.size() != num_types()) throw ValidationError("xi needs one candidate jump per type");
    MassTable table(state, config_.dx);
    return xi_eval(*this, state, table, z);
}

MFCascadeResult MeanFieldModel::resolve_cascade(const DensityField& state, const std::vector<double>& seed) const {
    const std::size_t L = num_types();
    if (!seed.empty() && seed.size() != L) throw ValidationError("cascade seed needs one entry per type");
    const bool seeded = !seed.empty();
    const double tol = config_.cascade_tol;
    MassTable table(state, config_.dx);
    MFCascadeResult res;

    for (double eps = config_.eps0;; eps *= config_.eps_decay) {
        if (eps < config_.eps_min * (1.0 + 1e-12)) eps = config_.eps_min;
        std::vector<double> delta = seeded ? seed : std::vector<double>(L, 0.0);
        std::vector<double> z(L);
        std::size_t it = 0;
        for (; it < config_.cascade_cap; ++it) {
            for (std::size_t l = 0; l < L; ++l) z[l] = eps + delta[l];
            std::vector<double> next = xi_eval(*this, state, table, z);
            for (std::size_t l = 0; l < L; ++l) {
                if (seeded) {
                    next[l] = std::max(next[l], delta[l]);
                } else if (next[l] < delta[l] - tol) {
                    throw NumericalError("mean-field cascade iterates decreased in m");
                }
            }
            const double change = max_abs_diff(next, delta);
            delta = std::move(next);
            if (change < tol) break;
        }
        if (it >= config_.cascade_cap) throw NumericalError("mean-field cascade iteration hit its cap");
        if (!res.eps_jumps.empty()) {
            const auto& prev = res.eps_jumps.back();
            for (std::size_t l = 0; l < L; ++l)
                if (delta[l] > prev[l] + tol) throw NumericalError("mean-field cascade increased as eps decreased");
        }
        res.eps.push_back(eps);
        res.eps_jumps.push_back(delta);
        res.eps_iterations.push_back(it);
        if (eps <= config_.eps_min) break;
    }

    const double max_exposure = std::max(spec_.exposures.maxCoeff(), 0.0);
    const double floor = 2.0 * config_.eps_min * std::max(max_exposure, 1e-300);
    std::vector<double> delta = res.eps_jumps.back();
    res.jumps.assign(L, 0.0);
    if (*std::max_element(delta.begin(), delta.end()) <= floor) return res;

    // Downward iteration to the largest fixed point below the eps_min value.
    for (res.refinement_iterations = 0; res.refinement_iterations < config_.cascade_cap; ++res.refinement_iterations) {
        std::vector<double> next = xi_eval(*this, state, table, delta);
        const double change = max_abs_diff(next, delta);
        for (std::size_t l = 0; l < L; ++l) delta[l] = std::min(delta[l], next[l]);
        if (change < tol) break;
    }
    if (*std::max_element(delta.begin(), delta.end()) <= floor) return res;
    res.jump = true;
    res.jumps = delta;
    res.fixed_point_residual = max_abs_diff(xi_eval(*this, state, table, delta), delta);
    return res;
}

std::vector<double> MeanFieldModel::apply_jump(DensityField& state, const std::vector<double>& jumps) const {
    const std::size_t L = num_types(), Q = num_thetas();
    if (jumps.size() != L) throw ValidationError("apply_jump needs one jump per type");
    std::vector<double> losses(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        if (jumps[l] < 0.0) throw ValidationError("mean-field jumps must be nonnegative");
        for (std::size_t q = 0; q < Q; ++q) {
            const double shift = theta_mf(state, state.t, l, q, jumps[l]);
            const double out = shift_left(state.values[l * Q + q], shift);
            state.absorbed[l * Q + q] += out;
            losses[l] += spec_.theta.weights[q] * (1.0 + spec_.theta.nodes[q]) * out;
        }
    }
    const double g = spec_.decay(state.t);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t i = 0; i < L; ++i) state.feedback[l] += g * spec_.exposures(i, l) * losses[i];
    return losses;
}

}  // namespace contagion
