#include "contagion/convergence.hpp"

#include <algorithm>
#include <cmath>

#include "contagion/errors.hpp"
#include "contagion/parallel.hpp"
#include "contagion/rng.hpp"

namespace contagion {

double loss_distance(const std::vector<double>& a, const std::vector<double>& b, double dt, double shift_horizon) {
    if (a.size() != b.size() || a.empty()) throw ValidationError("loss paths must share a nonempty grid");
    if (!(dt > 0.0)) throw ValidationError("loss_distance needs dt > 0");
    const auto N = static_cast<long>(a.size());
    const double H = shift_horizon > 0.0 ? shift_horizon : 10.0 * dt;
    const long K = std::min(static_cast<long>(std::llround(H / dt)), N);
    auto at = [N](const std::vector<double>& p, long i) { return p[static_cast<std::size_t>(std::clamp(i, 0L, N - 1))]; };

    double best = std::numeric_limits<double>::infinity();
    for (long h = 0; h <= K; ++h) {
        for (long sign : {1L, -1L}) {
            if (h == 0 && sign < 0) continue;
            const long shift = sign * h;
            const double penalty = static_cast<double>(h) * dt;
            if (penalty >= best) continue;
            double sup = 0.0;
            const long lo = std::min(0L, -shift), hi = std::max(N - 1, N - 1 - shift);
            for (long i = lo; i <= hi && penalty + sup < best; ++i) sup = std::max(sup, std::abs(at(a, i) - at(b, i + shift)));
            best = std::min(best, penalty + sup);
        }
    }
    return best;
}

TypeAtlas ScalingBase::atlas() const { return core_periphery_atlas(blocks); }

MixtureSpec ScalingBase::mixture() const {
    const TypeAtlas at = atlas();
    if (types.size() != at.num_types()) {
        throw ValidationError("scaling base needs dynamics for each of the " + std::to_string(at.num_types()) + " types");
    }
    MixtureSpec spec;
    for (std::size_t l = 0; l < types.size(); ++l) {
        MixtureType t;
        t.name = types[l].name;
        t.weight = at.weights[l];
        t.drift = types[l].drift;
        t.vol = types[l].vol;
        t.feedback = types[l].feedback;
        t.initial = types[l].initial;
        spec.types.push_back(std::move(t));
    }
    spec.exposures = mean_field_exposures(at);
    spec.decay = decay;
    spec.theta = ThetaQuadrature::from_noise(theta_noise, theta_nodes);
    spec.rho = rho;
    spec.horizon = horizon;
    return spec;
}

std::vector<std::vector<double>> empirical_type_losses(const Trajectory& traj, const TypeAtlas& atlas) {
    const std::size_t L = atlas.num_types();
    std::vector<std::vector<double>> out(L, std::vector<double>(traj.grid.size(), 0.0));
    std::vector<double> members(L, 0.0);
    for (std::size_t j = 0; j < atlas.labels.size(); ++j) members[atlas.labels[j]] += 1.0;
    for (std::size_t j = 0; j < atlas.labels.size(); ++j) {
        const double tau = traj.default_times[j];
        if (tau == kNever) continue;
        const std::size_t l = atlas.labels[j];
        const double w = (1.0 + atlas.thetas[j]) / members[l];
        for (std::size_t s = 0; s < traj.grid.size(); ++s)
            if (traj.grid[s] >= tau) out[l][s] += w;
    }
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

ScalingStudy run_scaling_study(const ScalingBase& base, const ScalingConfig& config) {
    if (config.m_list.empty() || config.seeds_per_m == 0) throw ValidationError("scaling study needs m values and seeds");
    if (base.finite_stride == 0) throw ValidationError("finite_stride must be >= 1");
    const TypeAtlas atlas = base.atlas();
    const MeanFieldModel model(base.mixture(), base.mf);
    const std::size_t L = atlas.num_types();
    const std::size_t mc = base.blocks.core_count();

    const CommonNoisePath fine = CommonNoisePath::generate(config.common_seed, model.dt(), model.steps());
    const MFOutput mf = model.solve(fine);
    const std::size_t stride = base.finite_stride;
    if (model.steps() % stride != 0) throw ValidationError("finite_stride must divide the mean-field step count");
    const std::size_t coarse_steps = model.steps() / stride;
    CommonNoisePath coarse;
    coarse.dt = model.dt() * static_cast<double>(stride);
    coarse.increments.assign(coarse_steps, 0.0);
    for (std::size_t s = 0; s < model.steps(); ++s) coarse.increments[s / stride] += fine.increments[s];

    ScalingStudy study;
    study.config = config;
    study.grid.resize(coarse_steps + 1);
    study.mean_field_losses.assign(L, std::vector<double>(coarse_steps + 1));
    for (std::size_t s = 0; s <= coarse_steps; ++s) {
        study.grid[s] = mf.times[s * stride];
        for (std::size_t l = 0; l < L; ++l) study.mean_field_losses[l][s] = mf.weighted_losses[l][s * stride];
    }

    const std::size_t runs = config.m_list.size() * config.seeds_per_m;
    study.rows.resize(runs);
    parallel_for(runs, [&](std::size_t index) {
        const std::size_t m = config.m_list[index / config.seeds_per_m];
        const std::size_t r = index % config.seeds_per_m;
        const std::uint64_t run_seed = derive_seed(config.seed, (static_cast<std::uint64_t>(m) << 24) + r);
        const std::size_t n = m * atlas.labels.size();

        NoiseSpec noise = base.theta_noise;
        noise.seed = run_seed;
        const std::vector<double> thetas = sample_noise(noise, n, kThetaStream);
        const TypeAtlas scaled = expand_atlas(atlas, mc, m, thetas);

        ParticleSystem sys;
        sys.channels = atlas_factorization(scaled);
        sys.feedback.decay = base.decay;
        sys.rho = base.rho;
        sys.horizon = base.horizon;
        Engine init = make_engine(run_seed, kInitialStateStream);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t l = scaled.labels[i];
            const double x0 = sample_from_density(model.initial_density(l), model.dx(), init);
            sys.free0.push_back(std::max(x0, 1e-12));
            sys.drift.push_back(base.types[l].drift);
            sys.vol.push_back(base.types[l].vol);
            sys.feedback.maps.push_back(base.types[l].feedback);
        }
        SimConfig cfg;
        cfg.dt = coarse.dt;
        cfg.seed = run_seed;
        cfg.common_seed = config.common_seed;
        cfg.record_paths = false;
        const Trajectory traj = simulate_particles(sys, cfg, &coarse);
        const auto empirical = empirical_type_losses(traj, scaled);

        ScalingRow row;
        row.m = m;
        row.seed = run_seed;
        for (std::size_t l = 0; l < L; ++l)
            row.distances.push_back(loss_distance(empirical[l], study.mean_field_losses[l], coarse.dt));
        study.rows[index] = std::move(row);
    });

    std::vector<double> ms, means;
    for (std::size_t k = 0; k < config.m_list.size(); ++k) {
        ScalingSummary sum;
        sum.m = config.m_list[k];
        sum.mean.assign(L, 0.0);
        sum.standard_error.assign(L, 0.0);
        const double S = static_cast<double>(config.seeds_per_m);
        std::vector<double> overall;
        for (std::size_t r = 0; r < config.seeds_per_m; ++r) {
            const auto& row = study.rows[k * config.seeds_per_m + r];
            double avg = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                sum.mean[l] += row.distances[l] / S;
                avg += row.distances[l] / static_cast<double>(L);
            }
            overall.push_back(avg);
        }
        for (std::size_t l = 0; l < L; ++l) {
            double var = 0.0;
            for (std::size_t r = 0; r < config.seeds_per_m; ++r) {
                const double d = study.rows[k * config.seeds_per_m + r].distances[l] - sum.mean[l];
                var += d * d;
            }
            sum.standard_error[l] = S > 1 ? std::sqrt(var / (S - 1.0) / S) : 0.0;
        }
        for (double v : overall) sum.overall_mean += v / S;
        double var = 0.0;
        for (double v : overall) var += (v - sum.overall_mean) * (v - sum.overall_mean);
        sum.overall_se = S > 1 ? std::sqrt(var / (S - 1.0) / S) : 0.0;
        ms.push_back(static_cast<double>(sum.m));
        means.push_back(sum.overall_mean);
        study.summary.push_back(std::move(sum));
    }
    study.loglog_slope = loglog_slope(ms, means);
    return study;
}

FullReducedRow compare_full_reduced_once(const LiabilityNetwork& full, const LiabilityNetwork& reduced,
                                         const std::vector<BankParams>& params, const MarketParams& market,
                                         double dt, std::uint64_t seed) {
    if (full.size() != reduced.size()) throw ValidationError("full and reduced networks must have the same size");
    SimConfig cfg;
    cfg.dt = dt;
    cfg.seed = seed;
    cfg.common_seed = seed;
    cfg.record_paths = false;
    const Trajectory a = simulate(full, params, market, cfg);
    const Trajectory b = simulate(reduced, params, market, cfg);
    FullReducedRow row;
    row.seed = seed;
    row.full_times = a.default_times;
    row.reduced_times = b.default_times;
    row.survivor_agreement = true;
    double sq = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        const bool fa = a.default_times[i] != kNever, fb = b.default_times[i] != kNever;
        if (fa != fb) row.survivor_agreement = false;
        if (fa && fb) {
            const double d = a.default_times[i] - b.default_times[i];
            sq += d * d;
            ++row.both_defaulted;
        }
    }
    row.norm_diff = std::sqrt(sq);
    return row;
}

FullReducedReport compare_full_reduced(const LiabilityNetwork& full, const LiabilityNetwork& reduced,
                                       const std::vector<BankParams>& params, const MarketParams& market, double dt,
                                       const std::vector<std::uint64_t>& seeds) {
    FullReducedReport report;
    report.rows.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        report.rows[k] = compare_full_reduced_once(full, reduced, params, market, dt, seeds[k]);
    });
    std::vector<double> diffs;
    std::size_t agree = 0;
    for (const auto& r : report.rows) {
        diffs.push_back(r.norm_diff);
        agree += r.survivor_agreement ? 1 : 0;
    }
    if (!diffs.empty()) {
        std::sort(diffs.begin(), diffs.end());
        const std::size_t n = diffs.size();
        report.median_norm_diff = n % 2 ? diffs[n / 2] : 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);
        report.agreement_rate = static_cast<double>(agree) / static_cast<double>(n);
    }
    return report;
}

}  // namespace contagion
