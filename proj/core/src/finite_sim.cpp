#include "contagion/finite_sim.hpp"

#include <cmath>
#include <sstream>

#include "contagion/errors.hpp"
#include "contagion/rng.hpp"

namespace contagion {

void MarketParams::validate() const {
    if (!(rho > -1.0 && rho < 1.0)) throw ValidationError("rho must lie in (-1,1)");
    if (!(recovery >= 0.0 && recovery <= 1.0)) throw ValidationError("recovery R2 must lie in [0,1]");
}

std::size_t step_count(double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ValidationError("dt and T must be positive");
    const double steps = std::round(horizon / dt);
    if (steps < 1.0 || std::abs(steps * dt - horizon) > 1e-9 * horizon) {
        throw ValidationError("dt must divide T");
    }
    return static_cast<std::size_t>(steps);
}

CommonNoisePath CommonNoisePath::generate(std::uint64_t common_seed, double dt, std::size_t steps) {
    CommonNoisePath path;
    path.dt = dt;
    path.increments.resize(steps);
    auto eng = make_engine(common_seed, kCommonNoiseStream);
    std::normal_distribution<double> normal;
    const double sd = std::sqrt(dt);
    for (auto& x : path.increments) x = sd * normal(eng);
    return path;
}

double CommonNoisePath::value_at(std::size_t step) const {
    double b = 0.0;
    for (std::size_t s = 0; s < step && s < increments.size(); ++s) b += increments[s];
    return b;
}

void ParticleSystem::validate() const {
    const std::size_t n = size();
    auto check_count = [n](std::size_t c, const char* what) {
        if (c != 1 && c != n) throw ValidationError(std::string(what) + " needs one entry or one per bank");
    };
    check_count(drift.size(), "drift");
    check_count(vol.size(), "volatility");
    feedback.validate(n);
    if (channels.size() != n) throw ValidationError("channel factorization size must equal bank count");
    if (!(rho > -1.0 && rho < 1.0)) throw ValidationError("rho must lie in (-1,1)");
    for (const auto& s : vol)
        if (s.min_value() < 0.0) throw ValidationError("volatility must be nonnegative");
}

double capital(double t, double x_t, const BankParams& params, double net_liab, double recovery, double horizon,
               const std::vector<std::pair<double, double>>& defaulted) {
    double contagion = 0.0;
    for (const auto& [tau, rate] : defaulted) contagion += (horizon - tau) * rate;
    return x_t * std::exp(params.mu.integral(t, horizon)) - net_liab - (1.0 - recovery) * contagion;
}

double to_distance(double x_t, double t, const BankParams& params, double net_liab, double recovery,
                   double horizon, double feedback_integral) {
    if (!(x_t > 0.0)) throw ValidationError("distance to default needs positive assets");
    const double denom = net_liab + horizon * (1.0 - recovery) * feedback_integral;
    if (!(denom > 0.0)) throw ValidationError("distance to default needs positive effective liabilities");
    return std::log(x_t * std::exp(params.mu.integral(t, horizon)) / denom);
}

EisenbergNoeSystem eisenberg_noe_system(const LiabilityNetwork& net, const std::vector<BankParams>& params,
                                        const MarketParams& market) {
    net.validate();
    market.validate();
    const std::size_t n = net.size();
    if (params.size() != n) throw ValidationError("need one BankParams per bank");
    const double T = net.horizon;
    EisenbergNoeSystem sys;
    sys.net_liab = net_liabilities(net);
    sys.feedback.decay = DecayFn::linear_decay(T);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = params[i];
        if (!(p.x0 > 0.0)) throw ValidationError("bank " + std::to_string(i) + ": x0 must be positive");
        if (p.sigma.min_value() < 0.0) throw ValidationError("bank " + std::to_string(i) + ": sigma must be >= 0");
        const double assets_at_T = p.x0 * std::exp(p.mu.integral(0.0, T));
        const double lbar = sys.net_liab[i];
        if (!(assets_at_T > lbar)) {
            std::ostringstream os;
            os << "bank " << i << " is in default at t = 0 (x0 e^{int mu} = " << assets_at_T
               << " <= net liabilities " << lbar << ")";
            throw ValidationError(os.str());
        }
        if (lbar > 0.0) {
            sys.feedback.maps.push_back(FeedbackMap::log1p_scaled((1.0 - market.recovery) * T / lbar));
            sys.reference.push_back(lbar);
        } else {
            sys.feedback.maps.push_back(FeedbackMap::log_affine(lbar, T * (1.0 - market.recovery)));
            sys.reference.push_back(1.0);
        }
        sys.free0.push_back(std::log(assets_at_T / sys.reference.back()));
    }
    return sys;
}

Trajectory simulate_particles(const ParticleSystem& system, const SimConfig& config, const CommonNoisePath* common) {
    system.validate();
    const std::size_t n = system.size();
    const std::size_t k = system.channels.k;
    const double T = system.horizon;
    const double dt = config.dt > 0.0 ? config.dt : T / 2000.0;
    const std::size_t steps = step_count(T, dt);
    for (const auto* fns : {&system.drift, &system.vol})
        for (const auto& f : *fns)
            if (!f.aligned_to(dt)) throw ValidationError("coefficient breakpoints must lie on the time grid");

    CommonNoisePath generated;
    if (common == nullptr) {
        generated = CommonNoisePath::generate(config.common_seed, dt, steps);
        common = &generated;
    } else if (std::abs(common->dt - dt) > 1e-15 * dt || common->increments.size() < steps) {
        throw ValidationError("common noise path does not match the simulation grid");
    }

    auto drift_of = [&](std::size_t i) -> const PiecewiseConstant& {
        return system.drift.size() == 1 ? system.drift[0] : system.drift[i];
    };
    auto vol_of = [&](std::size_t i) -> const PiecewiseConstant& {
        return system.vol.size() == 1 ? system.vol[0] : system.vol[i];
    };

    SystemState state;
    state.free = system.free0;
    state.X.resize(n);
    state.alive.assign(n, 1);
    state.losses.assign(k, 0.0);
    state.channel_integrals.assign(k, 0.0);
    state.feedback_integrals.assign(n, 0.0);
    state.default_times.assign(n, kNever);
    for (std::size_t i = 0; i < n; ++i) {
        state.X[i] = state.free[i] - system.feedback.map_for(i)(0.0);
        if (!(state.X[i] > 0.0)) {
            throw ValidationError("bank " + std::to_string(i) + " is at or below the default boundary at t = 0");
        }
    }

    Trajectory traj;
    traj.seed = config.seed;
    traj.common_seed = config.common_seed;
    traj.dt = dt;
    traj.default_times = state.default_times;
    traj.default_rounds.assign(n, -1);
    traj.grid.resize(steps + 1);
    for (std::size_t s = 0; s <= steps; ++s) traj.grid[s] = static_cast<double>(s) * dt;
    traj.loss_paths.assign(k, std::vector<double>(steps + 1, 0.0));
    if (config.record_paths) {
        traj.X_paths.assign(n, std::vector<double>(steps + 1));
        traj.free_paths.assign(n, std::vector<double>(steps + 1));
    }
    auto record = [&](std::size_t s) {
        for (std::size_t l = 0; l < k; ++l) traj.loss_paths[l][s] = state.losses[l];
        if (!config.record_paths) return;
        for (std::size_t i = 0; i < n; ++i) {
            traj.X_paths[i][s] = state.X[i];
            traj.free_paths[i][s] = state.free[i];
        }
    };
    record(0);

    std::vector<Engine> engines;
    engines.reserve(n);
    for (std::size_t i = 0; i < n; ++i) engines.push_back(make_engine(config.seed, i));
    std::normal_distribution<double> normal;
    const double idio = std::sqrt(1.0 - system.rho * system.rho);
    const double sqrt_dt = std::sqrt(dt);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (std::size_t s = 0; s < steps; ++s) {
        const double t0 = traj.grid[s];
        const double t1 = traj.grid[s + 1];
        const double mid = 0.5 * (t0 + t1);
        const double dB0 = common->increments[s];
        bool boundary_hit = false;
        for (std::size_t i = 0; i < n; ++i) {
            normal.reset();
            const double z = normal(engines[i]);
            const double sigma = vol_of(i)(mid);
            state.free[i] += drift_of(i).integral(t0, t1) + sigma * (system.rho * dB0 + idio * sqrt_dt * z);
            state.X[i] = state.free[i] - system.feedback.map_for(i)(state.feedback_integrals[i]);
            if (std::isnan(state.X[i])) {
                std::ostringstream os;
                os << "NaN distance for bank " << i << " at t = " << t1;
                throw NumericalError(os.str());
            }
            if (state.alive[i] && state.X[i] <= 0.0) boundary_hit = true;
        }
        state.t = t1;
        if (boundary_hit) {
            CascadeReport report = resolve_cascade(state, system.channels, system.feedback);
            const double g = system.feedback.decay(t1);
            for (std::size_t m = 0; m < report.rounds.size(); ++m) {
                for (std::size_t j : report.rounds[m]) {
                    state.alive[j] = 0;
                    state.default_times[j] = t1;
                    traj.default_times[j] = t1;
                    traj.default_rounds[j] = static_cast<int>(m);
                    for (std::size_t l = 0; l < k; ++l) state.losses[l] += inv_n * system.channels.U(j, l);
                }
            }
            for (std::size_t l = 0; l < k; ++l) state.channel_integrals[l] += g * report.channel_jumps[l];
            for (std::size_t i = 0; i < n; ++i) {
                state.feedback_integrals[i] += g * report.final_jumps[i];
                state.X[i] = state.free[i] - system.feedback.map_for(i)(state.feedback_integrals[i]);
            }
            traj.cascade_reports.push_back(std::move(report));
        }
        record(s + 1);
    }
    return traj;
}

Trajectory simulate(const LiabilityNetwork& net, const std::vector<BankParams>& params, const MarketParams& market,
                    const SimConfig& config, const RankFactorization* fac, const CommonNoisePath* common) {
    const EisenbergNoeSystem en = eisenberg_noe_system(net, params, market);
    const std::size_t n = net.size();
    ParticleSystem system;
    system.free0 = en.free0;
    system.feedback = en.feedback;
    system.rho = market.rho;
    system.horizon = net.horizon;
    system.channels = fac ? *fac : rank_factorize(net);
    if (system.channels.size() != n) throw ValidationError("factorization does not match the network size");
    for (const auto& p : params) {
        std::vector<double> half_var;
        for (double s : p.sigma.values()) half_var.push_back(-0.5 * s * s);
        system.drift.emplace_back(p.sigma.breaks(), half_var);
        system.vol.push_back(p.sigma);
    }
    Trajectory traj = simulate_particles(system, config, common);
    if (!config.record_paths) return traj;

    const double T = net.horizon;
    const std::size_t points = traj.grid.size();
    traj.K_paths.assign(n, std::vector<double>(points));
    std::vector<std::size_t> order;  // defaulted banks, in default order
    for (std::size_t s = 0; s < points; ++s) {
        const double t = traj.grid[s];
        order.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (traj.default_times[j] <= t) order.push_back(j);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::pair<double, double>> defaulted;
            defaulted.reserve(order.size());
            for (std::size_t j : order) defaulted.emplace_back(traj.default_times[j], net.rates(j, i));
            const double assets_at_T = en.reference[i] * std::exp(traj.free_paths[i][s]);
            const double x_t = assets_at_T * std::exp(-params[i].mu.integral(t, T));
            traj.K_paths[i][s] = capital(t, x_t, params[i], en.net_liab[i], market.recovery, T, defaulted);
        }
    }
    return traj;
}

std::vector<std::vector<double>> empirical_losses(const Trajectory& traj, const RankFactorization& fac) {
    const std::size_t n = fac.size();
    if (traj.default_times.size() != n) throw ValidationError("factorization does not match the trajectory");
    std::vector<std::vector<double>> out(fac.k, std::vector<double>(traj.grid.size(), 0.0));
    for (std::size_t l = 0; l < fac.k; ++l)
        for (std::size_t s = 0; s < traj.grid.size(); ++s) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (traj.default_times[j] <= traj.grid[s]) total += fac.U(j, l);
            out[l][s] = total / static_cast<double>(n);
        }
    return out;
}

}  // namespace contagion
