#include <algorithm>
#include <cmath>
#include <sstream>

#include "contagion/errors.hpp"
#include "contagion/mean_field.hpp"

namespace contagion {

MeanFieldModel::MeanFieldModel(MixtureSpec spec, MFConfig config) : spec_(std::move(spec)), config_(std::move(config)) {
    spec_.validate();
    config_.validate();
    const double T = spec_.horizon;
    const double dx = config_.dx;

    double sigma_max = 0.0, support = 0.0, drift_up = 0.0;
    for (const auto& t : spec_.types) {
        sigma_max = std::max(sigma_max, t.vol.max_value());
        support = std::max(support, t.initial.support_max());
        drift_up = std::max(drift_up, t.drift.max_value());
    }
    const double x_max = config_.x_max > 0.0 ? config_.x_max : support + 6.0 * sigma_max * std::sqrt(T) + drift_up * T;
    nodes_ = static_cast<std::size_t>(std::ceil(x_max / dx - 1e-9)) + 1;
    if (nodes_ < 4) throw ValidationError("mean-field grid needs at least 4 nodes");

    if (config_.dt > 0.0) {
        dt_ = config_.dt;
    } else {
        const double needed = sigma_max > 0.0 ? T * sigma_max * sigma_max / (0.45 * dx * dx) : 0.0;
        dt_ = T / std::max(2000.0, std::ceil(needed));
    }
    steps_ = step_count(T, dt_);
    for (const auto& t : spec_.types) {
        for (const auto* fn : {&t.drift, &t.vol})
            if (!fn->aligned_to(dt_)) throw ValidationError("type coefficient breakpoints must lie on the time grid");
    }

    const double courant = sigma_max * sigma_max * dt_ / (dx * dx);
    if (courant > 0.5 + 1e-12) {
        std::ostringstream os;
        os << "stability bound violated: sigma_max^2 dt / dx^2 = " << courant << " > 1/2 (dx = " << dx
           << ", dt = " << dt_ << ")";
        throw NumericalError(os.str());
    }
    for (const auto& t : spec_.types) {
        const double D = 0.5 * (1.0 - spec_.rho * spec_.rho) * t.vol.max_value() * t.vol.max_value();
        const double b = std::max(std::abs(t.drift.max_value()), std::abs(t.drift.min_value()));
        if (2.0 * D * dt_ / (dx * dx) + 2.0 * b * dt_ / dx > 1.0) {
            throw NumericalError("positivity bound violated for type '" + t.name + "': reduce dt");
        }
    }

    double vmax = 0.0;
    for (const auto& t : spec_.types) {
        std::vector<double> v = t.initial.discretize(dx, nodes_);
        v[0] = 0.0;
        const double m = mass(v);
        if (!(m > 0.0)) throw ValidationError("initial density of type '" + t.name + "' has no mass on the grid");
        const bool shape_only = t.initial.kind == InitialProfile::Kind::Gaussian ||
                                t.initial.kind == InitialProfile::Kind::Uniform;
        if (!shape_only && std::abs(m - 1.0) > 1e-3) {
            std::ostringstream os;
            os << "initial density of type '" << t.name << "' integrates to " << m << " on the grid";
            throw ValidationError(os.str());
        }
        for (double& x : v) x /= m;
        vmax = std::max(vmax, *std::max_element(v.begin(), v.end()));
        initial_.push_back(std::move(v));
    }
    threshold_ = config_.explosion_threshold > 0.0 ? config_.explosion_threshold
                                                   : 10.0 * std::sqrt(dt_) * std::max(sigma_max, 1e-3) * vmax;
}

double MeanFieldModel::mass(const std::vector<double>& v) const {
    double total = 0.5 * (v.front() + v.back());
    for (std::size_t j = 1; j + 1 < v.size(); ++j) total += v[j];
    return total * config_.dx;
}

double MeanFieldModel::absorb_node0(std::vector<double>& v) const {
    const double a = 0.5 * config_.dx * v[0];
    v[0] = 0.0;
    return a;
}

double MeanFieldModel::tail_mass(const std::vector<double>& v) const {
    const std::size_t width = std::max<std::size_t>(2, v.size() / 100);
    double total = 0.0;
    for (std::size_t j = v.size() - width; j < v.size(); ++j) total += v[j];
    return total * config_.dx;
}

// Flux-form explicit step; node 0 must already be zero. Returns the absorbed mass.
double MeanFieldModel::diffuse(std::vector<double>& v, double D, double b) const {
    const double dx = config_.dx;
    const std::size_t J = v.size() - 1;
    const double bp = std::max(b, 0.0), bm = std::min(b, 0.0);
    thread_local std::vector<double> flux;
    flux.resize(J);
    for (std::size_t j = 0; j < J; ++j) flux[j] = -D * (v[j + 1] - v[j]) / dx + bp * v[j] + bm * v[j + 1];
    const double r = dt_ / dx;
    for (std::size_t j = 1; j < J; ++j) v[j] += r * (flux[j - 1] - flux[j]);
    v[J] += 2.0 * r * flux[J - 1];
    v[0] = 0.0;
    return -dt_ * flux[0];
}

// V(x) <- V(x + amount) by linear interpolation; returns the mass that left through x = 0.
double MeanFieldModel::shift_left(std::vector<double>& v, double amount) const {
    if (!(amount > 0.0)) return 0.0;
    const double before = mass(v);
    const double cells = amount / config_.dx;
    const auto m = static_cast<std::size_t>(std::floor(cells));
    const double a = cells - static_cast<double>(m);
    const std::size_t n = v.size();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = j + m;
        const double lo = k < n ? v[k] : 0.0;
        const double hi = k + 1 < n ? v[k + 1] : 0.0;
        v[j] = (1.0 - a) * lo + a * hi;
    }
    return std::max(0.0, before - mass(v));
}

// Exact translation by whole cells: positive moves mass away from 0. Mass pushed
// past the right edge is kept on the last node; returns mass absorbed at x = 0.
double MeanFieldModel::shift_cells(std::vector<double>& v, long cells) const {
    if (cells == 0) return 0.0;
    const double before = mass(v);
    const std::size_t n = v.size();
    const std::size_t k = static_cast<std::size_t>(std::labs(cells));
    if (cells < 0) {
        for (std::size_t j = 0; j < n; ++j) v[j] = j + k < n ? v[j + k] : 0.0;
        return before - mass(v);
    }
    for (std::size_t j = n; j-- > 0;) v[j] = j >= k ? v[j - k] : 0.0;
    const double lost = before - mass(v);
    v[n - 1] += lost / (0.5 * config_.dx);
    return 0.0;
}

DensityField MeanFieldModel::initial_state() const {
    DensityField s;
    s.t = 0.0;
    for (std::size_t l = 0; l < num_types(); ++l)
        for (std::size_t q = 0; q < num_thetas(); ++q) s.values.push_back(initial_[l]);
    s.absorbed.assign(num_subtypes(), 0.0);
    s.feedback.assign(num_types(), 0.0);
    s.offsets.assign(num_types(), 0.0);
    return s;
}

std::vector<double> MeanFieldModel::loss_from_density(const DensityField& state) const {
    std::vector<double> out(num_types(), 1.0);
    const std::size_t Q = num_thetas();
    for (std::size_t l = 0; l < num_types(); ++l)
        for (std::size_t q = 0; q < Q; ++q) out[l] -= spec_.theta.weights[q] * mass(state.values[l * Q + q]);
    return out;
}

std::vector<double> MeanFieldModel::weighted_losses(const DensityField& state) const {
    std::vector<double> out(num_types(), 0.0);
    const std::size_t Q = num_thetas();
    for (std::size_t l = 0; l < num_types(); ++l)
        for (std::size_t q = 0; q < Q; ++q)
            out[l] += spec_.theta.weights[q] * (1.0 + spec_.theta.nodes[q]) * state.absorbed[l * Q + q];
    return out;
}

std::vector<double> MeanFieldModel::exposure_losses(const std::vector<double>& weighted) const {
    std::vector<double> out(num_types(), 0.0);
    for (std::size_t l = 0; l < num_types(); ++l)
        for (std::size_t i = 0; i < num_types(); ++i) out[l] += spec_.exposures(i, l) * weighted[i];
    return out;
}

double MeanFieldModel::theta_mf(const DensityField& state, double t, std::size_t type, std::size_t theta_index,
                                double z) const {
    if (z < 0.0) throw ValidationError("theta_mf needs a nonnegative jump");
    const double scale = 1.0 + spec_.theta.nodes[theta_index];
    return spec_.types[type].feedback.increment(scale * state.feedback[type], scale * spec_.decay(t) * z);
}

StepOutcome MeanFieldModel::step(DensityField& state, double dB0) const { return advance(state, dB0, true); }

StepOutcome MeanFieldModel::advance(DensityField& state, double dB0, bool allow_cascade) const {
    const std::size_t L = num_types(), Q = num_thetas();
    const double t0 = state.t, t1 = t0 + dt_, mid = 0.5 * (t0 + t1);
    const double dx = config_.dx;
    std::vector<double> step_absorbed(num_subtypes(), 0.0);

    for (std::size_t l = 0; l < L; ++l) {
        const auto& type = spec_.types[l];
        const double sigma = type.vol(mid);
        const double D = 0.5 * (1.0 - spec_.rho * spec_.rho) * sigma * sigma;
        const double b = type.drift.integral(t0, t1) / dt_;
        for (std::size_t q = 0; q < Q; ++q) {
            auto& v = state.values[l * Q + q];
            step_absorbed[l * Q + q] += absorb_node0(v);
            step_absorbed[l * Q + q] += diffuse(v, D, b);
        }
        if (spec_.rho != 0.0) {
            state.offsets[l] += spec_.rho * sigma * dB0;
            const long cells = std::lround(state.offsets[l] / dx);
            if (cells != 0) {
                for (std::size_t q = 0; q < Q; ++q) {
                    auto& v = state.values[l * Q + q];
                    step_absorbed[l * Q + q] += shift_cells(v, cells);
                    step_absorbed[l * Q + q] += absorb_node0(v);
                }
                state.offsets[l] -= static_cast<double>(cells) * dx;
            }
        }
    }

    std::vector<double> base(L, 0.0);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t q = 0; q < Q; ++q)
            base[l] += spec_.theta.weights[q] * (1.0 + spec_.theta.nodes[q]) * step_absorbed[l * Q + q];

    const double g = spec_.decay(t1);
    StepOutcome out;
    std::vector<double> delta = base;
    std::vector<std::vector<double>> trial;
    std::vector<double> contagion_absorbed(num_subtypes(), 0.0);
    const bool coupled = g > 0.0 && spec_.exposures.maxCoeff() > 0.0;
    bool converged = !coupled, exploded = false;
    if (coupled) {
        const std::size_t cap = allow_cascade ? config_.inner_cap : 20 * config_.inner_cap;
        for (std::size_t it = 1; it <= cap; ++it) {
            out.inner_iterations = it;
            trial = state.values;
            std::vector<double> next = base;
            for (std::size_t l = 0; l < L; ++l) {
                double drive = 0.0;
                for (std::size_t i = 0; i < L; ++i) drive += spec_.exposures(i, l) * delta[i];
                for (std::size_t q = 0; q < Q; ++q) {
                    const double scale = 1.0 + spec_.theta.nodes[q];
                    const double shift =
                        spec_.types[l].feedback.increment(scale * state.feedback[l], scale * g * drive);
                    auto& v = trial[l * Q + q];
                    contagion_absorbed[l * Q + q] = shift_left(v, shift) + absorb_node0(v);
                    next[l] += spec_.theta.weights[q] * scale * contagion_absorbed[l * Q + q];
                }
            }
            double change = 0.0;
            for (std::size_t l = 0; l < L; ++l) change = std::max(change, std::abs(next[l] - delta[l]));
            delta = std::move(next);
            if (allow_cascade && *std::max_element(delta.begin(), delta.end()) > threshold_) {
                exploded = true;
                break;
            }
            if (change < config_.inner_tol) {
                converged = true;
                break;
            }
        }
    }

    state.t = t1;
    if (allow_cascade && !converged) exploded = true;  // a stalled inner iteration is treated as a trigger
    if (exploded || !converged) {
        if (!exploded) {
            std::ostringstream os;
            os << "within-step loss coupling did not converge in " << out.inner_iterations << " iterations at t = " << t1;
            throw NumericalError(os.str());
        }
        // Hand the left-limit state to the cascade resolver.
        for (std::size_t s = 0; s < num_subtypes(); ++s) state.absorbed[s] += step_absorbed[s];
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t i = 0; i < L; ++i) state.feedback[l] += g * spec_.exposures(i, l) * base[i];
        out.cascade = true;
        out.increments = base;
        out.trigger_drive.assign(L, 0.0);
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t i = 0; i < L; ++i) out.trigger_drive[l] += spec_.exposures(i, l) * (delta[i] - base[i]);
        return out;
    }
    if (coupled) state.values = std::move(trial);
    for (std::size_t s = 0; s < num_subtypes(); ++s) state.absorbed[s] += step_absorbed[s] + contagion_absorbed[s];
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t i = 0; i < L; ++i) state.feedback[l] += g * spec_.exposures(i, l) * delta[i];
    out.increments = delta;
    return out;
}

CheckResult MeanFieldModel::check_no_jump(const DensityField& state, double t) const {
    const std::size_t L = num_types(), Q = num_thetas();
    double lip = 0.0;
    for (const auto& type : spec_.types) lip = std::max(lip, type.feedback.lipschitz());
    const double factor = spec_.theta.max_scale() * lip * spec_.decay(t);
    const std::size_t window = std::min(config_.no_jump_window, nodes_ - 1);
    CheckResult res;
    res.per_type.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t j = 0; j <= window; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < L; ++i) {
                if (spec_.exposures(i, l) == 0.0) continue;
                double dens = 0.0;
                for (std::size_t q = 0; q < Q; ++q)
                    dens += spec_.theta.weights[q] * (1.0 + spec_.theta.nodes[q]) * state.values[i * Q + q][j];
                sum += spec_.exposures(i, l) * dens;
            }
            res.per_type[l] = std::max(res.per_type[l], factor * sum);
        }
    }
    res.margin = 1.0 - *std::max_element(res.per_type.begin(), res.per_type.end());
    res.pass = res.margin > 0.0;
    return res;
}

CheckResult MeanFieldModel::check_smallness() const {
    const std::size_t L = num_types();
    double lip = 0.0;
    for (const auto& type : spec_.types) lip = std::max(lip, type.feedback.lipschitz());
    double mean_scale = 0.0;
    for (std::size_t q = 0; q < num_thetas(); ++q) mean_scale += spec_.theta.weights[q] * (1.0 + spec_.theta.nodes[q]);
    const double factor = spec_.theta.max_scale() * lip * spec_.decay(0.0) * mean_scale;
    CheckResult res;
    res.per_type.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double sum = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            if (spec_.exposures(i, l) == 0.0) continue;
            sum += spec_.exposures(i, l) * *std::max_element(initial_[i].begin(), initial_[i].end());
        }
        res.per_type[l] = factor * sum;
    }
    res.margin = 1.0 - *std::max_element(res.per_type.begin(), res.per_type.end());
    res.pass = res.margin > 0.0;
    return res;
}

MFOutput MeanFieldModel::solve(std::uint64_t common_seed) const {
    return solve(CommonNoisePath::generate(common_seed, dt_, steps_));
}

MFOutput MeanFieldModel::solve(const CommonNoisePath& noise) const {
    if (std::abs(noise.dt - dt_) > 1e-12 * dt_ || noise.increments.size() < steps_) {
        throw ValidationError("common noise path does not match the mean-field time grid");
    }
    const std::size_t L = num_types(), Q = num_thetas();
    MFOutput out;
    out.noise = noise;
    out.dx = config_.dx;
    out.dt = dt_;
    out.explosion_threshold = threshold_;
    out.times.resize(steps_ + 1);
    out.losses.assign(L, std::vector<double>(steps_ + 1, 0.0));
    out.weighted_losses = out.losses;
    out.exposure_losses = out.losses;
    out.max_conservation_error.assign(L, 0.0);
    out.max_step_increment.assign(L, 0.0);
    out.l2_accumulation.assign(steps_ + 1, 0.0);

    std::vector<std::size_t> snapshot_steps;
    for (double ts : config_.snapshot_times) {
        const double k = std::round(ts / dt_);
        if (k >= 0.0 && k <= static_cast<double>(steps_)) snapshot_steps.push_back(static_cast<std::size_t>(k));
    }
    auto wants_snapshot = [&](std::size_t n) {
        if (config_.snapshot_every > 0 && n % config_.snapshot_every == 0) return true;
        return std::find(snapshot_steps.begin(), snapshot_steps.end(), n) != snapshot_steps.end();
    };

    DensityField state = initial_state();
    auto record = [&](std::size_t n) {
        out.times[n] = state.t;
        const auto plain = loss_from_density(state);
        const auto weighted = weighted_losses(state);
        const auto exposure = exposure_losses(weighted);
        for (std::size_t l = 0; l < L; ++l) {
            out.losses[l][n] = plain[l];
            out.weighted_losses[l][n] = weighted[l];
            out.exposure_losses[l][n] = exposure[l];
            double total = 0.0;
            for (std::size_t q = 0; q < Q; ++q)
                total += spec_.theta.weights[q] * (mass(state.values[l * Q + q]) + state.absorbed[l * Q + q]);
            out.max_conservation_error[l] = std::max(out.max_conservation_error[l], std::abs(total - 1.0));
        }
        if (wants_snapshot(n)) {
            DensitySnapshot snap;
            snap.t = state.t;
            snap.values.assign(L, std::vector<double>(nodes_, 0.0));
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t q = 0; q < Q; ++q)
                    for (std::size_t j = 0; j < nodes_; ++j)
                        snap.values[l][j] += spec_.theta.weights[q] * state.values[l * Q + q][j];
            out.snapshots.push_back(std::move(snap));
        }
    };
    record(0);

    double l2 = 0.0;
    for (std::size_t n = 0; n < steps_; ++n) {
        const auto before = weighted_losses(state);
        const DensityField saved = state;
        StepOutcome outcome = advance(state, noise.increments[n], true);
        bool jumped = false;
        if (outcome.cascade) {
            MFCascadeResult cascade = resolve_cascade(state, outcome.trigger_drive);
            if (cascade.jump) {
                MFJump jump;
                jump.t = state.t;
                jump.step = n + 1;
                jump.exposure_jumps = cascade.jumps;
                jump.loss_jumps = apply_jump(state, cascade.jumps);
                jump.cascade = std::move(cascade);
                if (!out.exploded) {
                    out.exploded = true;
                    out.t_star = state.t;
                }
                out.jumps.push_back(std::move(jump));
                jumped = true;
            } else {
                // Large but continuous increment: redo the step without the trigger.
                state = saved;
                advance(state, noise.increments[n], false);
            }
        }
        const auto after = weighted_losses(state);
        for (std::size_t l = 0; l < L; ++l) {
            const double inc = after[l] - before[l];
            if (!jumped) out.max_step_increment[l] = std::max(out.max_step_increment[l], inc);
            l2 += inc * inc / dt_;
        }
        out.l2_accumulation[n + 1] = l2;
        for (const auto& v : state.values) {
            if (tail_mass(v) > config_.tail_tol) {
                std::ostringstream os;
                os << "tail mass " << tail_mass(v) << " exceeds " << config_.tail_tol << " at t = " << state.t
                   << "; enlarge x_max";
                throw NumericalError(os.str());
            }
        }
        record(n + 1);
    }
    return out;
}

}  // namespace contagion
