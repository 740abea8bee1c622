// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "contagion/convergence.hpp"
#include "contagion/errors.hpp"
#include "contagion/finite_sim.hpp"
#include "contagion/mean_field.hpp"
#include "contagion/network.hpp"
#include "contagion_cli/config.hpp"
#include "contagion_cli/runner.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace contagion;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void quiet(const std::string&) {}

std::vector<BankParams> core_periphery_params(const LiabilityNetwork& net) {
    const auto lbar = net_liabilities(net);
    std::vector<BankParams> params;
    for (double l : lbar) {
        BankParams p;
        p.mu = PiecewiseConstant(0.0);
        p.sigma = PiecewiseConstant(0.5);
        p.x0 = l > 0.0 ? 1.25 * l : 20.0;
        params.push_back(p);
    }
    return params;
}

MarketParams core_periphery_market() {
    MarketParams m;
    m.rho = std::sqrt(0.5);
    m.recovery = 0.1;
    return m;
}

// Four core-periphery types; the core-1 / periphery-2 pair starts
// close to default and is heavily exposed, so it cannot avoid a joint jump.
MixtureSpec heat_spec(double vol) {
    const char* names[4] = {"Core 1", "Core 2", "Periphery 1", "Periphery 2"};
    const double weight[4] = {0.1, 0.1, 0.4, 0.4};
    const double drift[4] = {-0.5, 0.3, 0.3, -0.5};
    const double mean[4] = {0.6, 2.0, 1.2, 0.6};
    const double lambda[4] = {1.0, 40.0, 1.0, 1.0};
    MixtureSpec spec;
    for (int l = 0; l < 4; ++l) {
        MixtureType t;
        t.name = names[l];
        t.weight = weight[l];
        t.drift = PiecewiseConstant(drift[l]);
        t.vol = PiecewiseConstant(vol);
        t.feedback = FeedbackMap::log1p_scaled(0.9 / lambda[l]);
        t.initial = InitialProfile::gaussian(mean[l], 0.15);
        spec.types.push_back(t);
    }
    spec.exposures = Eigen::MatrixXd(4, 4);
    spec.exposures << 0, 15, 0, 12, 45, 0, 12, 4, 20, 8, 0, 0, 16, 12, 0, 0;
    spec.decay = DecayFn::linear_decay(1.0);
    spec.rho = 0.3;
    return spec;
}

Outcome initial_capital() {
    const auto net = fixtures::three_bank();
    const auto p = fixtures::three_bank_params();
    const auto market = fixtures::three_bank_market();
    const auto lbar = net_liabilities(net);
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(capital(0.0, p.x0, p, lbar[i], market.recovery, 1.0, {}) - 1.0));
    return {worst <= 1e-12, fmt("max |K_i(0) - 1| = %.3g", worst)};
}

Outcome reduced_rank() {
    const auto fac = rank_factorize(fixtures::core_periphery_reduced(), 1e-9);
    return {fac.k == 4, fmt("k = %zu", fac.k)};
}

Outcome exposure_matrix() {
    Eigen::MatrixXd expected(4, 4);
    expected << 0, 15, 0, 12, 45, 0, 12, 4, 20, 8, 0, 0, 16, 12, 0, 0;
    const auto atlas = core_periphery_atlas(fixtures::concrete_blocks());
    const Eigen::MatrixXd got = effective_exposures(atlas, atlas.base_size());
    const double err = (got - expected).cwiseAbs().maxCoeff();
    return {err <= 1e-8, fmt("max entry error %.3g", err)};
}

Outcome cascade_oracle() {
    std::mt19937_64 eng(20240611);
    std::uniform_int_distribution<std::size_t> size(2, 8);
    std::size_t agree = 0, nontrivial = 0;
    const std::size_t trials = 10000;
    for (std::size_t k = 0; k < trials; ++k) {
        const auto inst = oracles::random_instance(eng, size(eng));
        auto got = resolve_cascade(inst.state, inst.fac, inst.feedback).defaulted();
        auto want = greatest_clearing_oracle(inst.state, inst.net, inst.feedback);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        agree += got == want ? 1 : 0;
        nontrivial += want.size() > 1 ? 1 : 0;
    }
    return {agree == trials, fmt("%zu/%zu agree (%zu with more than one default)", agree, trials, nontrivial)};
}

Outcome sign_equivalence() {
    const auto net = fixtures::core_periphery_full();
    const auto params = core_periphery_params(net);
    const auto market = core_periphery_market();
    const auto fac = rank_factorize(net);
    std::size_t violations = 0, points = 0, defaults = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SimConfig cfg;
        cfg.dt = 1.0 / 2000.0;
        cfg.seed = seed;
        cfg.common_seed = seed;
        const Trajectory tr = simulate(net, params, market, cfg, &fac);
        for (std::size_t i = 0; i < tr.X_paths.size(); ++i) {
            defaults += tr.default_times[i] != kNever ? 1 : 0;
            for (std::size_t s = 0; s < tr.grid.size(); ++s) {
                ++points;
                if ((tr.X_paths[i][s] <= 0.0) != (tr.K_paths[i][s] <= 0.0)) ++violations;
            }
        }
    }
    return {violations == 0 && points == 100 * 10 * 2001,
            fmt("%zu violations over %zu grid points, %zu defaults", violations, points, defaults)};
}

Outcome conservation() {
    MFConfig cfg;
    cfg.dx = 0.01;
    cfg.x_max = 20.0;
    cfg.dt = 1.0 / 2000.0;
    const MeanFieldModel model(heat_spec(0.3), cfg);
    const MFOutput out = model.solve(std::uint64_t{1});
    double worst = 0.0;
    for (double e : out.max_conservation_error) worst = std::max(worst, e);
    return {worst <= 1e-4 && model.nodes() == 2001 && model.steps() == 2000,
            fmt("max |mass + loss - 1| = %.3g (%zu cells, %zu steps, %zu jumps)", worst, model.nodes() - 1,
                model.steps(), out.jumps.size())};
}

Outcome scheme_accuracy() {
    const double mean = 0.5, sd = 0.02, b = -0.3, sigma = 0.5;
    MixtureSpec spec;
    MixtureType t;
    t.drift = PiecewiseConstant(b);
    t.vol = PiecewiseConstant(sigma);
    t.initial = InitialProfile::gaussian(mean, sd);
    spec.types.push_back(t);
    spec.exposures = Eigen::MatrixXd::Zero(1, 1);
    MFConfig cfg;
    cfg.dx = 0.0025;
    const MeanFieldModel model(spec, cfg);
    const MFOutput out = model.solve(std::uint64_t{0});
    double err = 0.0, terminal = 0.0;
    for (std::size_t n = 0; n < out.times.size(); ++n) {
        terminal = oracles::gaussian_start_cdf(mean, sd, b, sigma, out.times[n], 801);
        err = std::max(err, std::abs(out.losses[0][n] - terminal));
    }
    const double rel = err / terminal;
    return {rel <= 0.02, fmt("sup error %.3g, %.2f%% of P(tau <= T) = %.4f (dx %.4g)", err, 100.0 * rel, terminal,
                             cfg.dx)};
}

MixtureSpec picard_spec() {
    MixtureSpec spec;
    for (int l = 0; l < 2; ++l) {
        MixtureType t;
        t.weight = 0.5;
        t.drift = PiecewiseConstant(-0.2);
        t.vol = PiecewiseConstant(0.4);
        t.feedback = FeedbackMap::log1p_scaled(0.6);
        t.initial = InitialProfile::gaussian(0.4 + 0.2 * l, 0.15);
        spec.types.push_back(t);
    }
    spec.exposures = Eigen::MatrixXd(2, 2);
    spec.exposures << 0.1, 0.3, 0.2, 0.1;
    spec.decay = DecayFn::linear_decay(1.0);
    return spec;
}

Outcome picard_cross() {
    struct Level {
        std::vector<double> stepper, picard;
        PicardResult res;
        double margin = 0.0;
    };
    auto solve_at = [](double dx) {
        MFConfig cfg;
        cfg.dx = dx;
        const MeanFieldModel model(picard_spec(), cfg);
        Level lv;
        lv.margin = model.check_smallness().margin;
        const MFOutput out = model.solve(std::uint64_t{0});
        lv.res = model.picard();
        for (std::size_t l = 0; l < 2; ++l) {
            lv.stepper.push_back(out.weighted_losses[l].back());
            lv.picard.push_back(lv.res.losses[l].back());
        }
        return lv;
    };
    const Level fine = solve_at(0.01), coarse = solve_at(0.02);
    const double picard_tol = MFConfig{}.picard_tol;
    bool agree = true;
    double worst_ratio = 0.0;
    for (std::size_t l = 0; l < 2; ++l) {
        const double tolerance = 2.0 * (std::abs(fine.stepper[l] - coarse.stepper[l]) + picard_tol);
        const double diff = std::abs(fine.stepper[l] - fine.picard[l]);
        agree = agree && diff <= tolerance;
        worst_ratio = std::max(worst_ratio, diff / tolerance);
    }
    const auto& r = fine.res.residuals;
    bool contracting = fine.res.converged && r.size() >= 3;
    for (std::size_t k = r.size() >= 3 ? r.size() - 3 : 0; k + 1 < r.size(); ++k) contracting = contracting && r[k + 1] < r[k];
    const double last_ratio = r.size() >= 2 ? r.back() / r[r.size() - 2] : 1.0;
    return {fine.margin >= 0.3 && agree && contracting,
            fmt("margin %.3f, |stepper - Picard| / tolerance <= %.3g, %zu iterations, last residual ratio %.3g",
                fine.margin, worst_ratio, fine.res.iterations, last_ratio)};
}

Outcome jump_reproduction() {
    MFConfig cfg;
    cfg.dx = 0.01;
    const MeanFieldModel model(heat_spec(0.4), cfg);
    const bool small = model.check_smallness().pass;
    const MFOutput out = model.solve(std::uint64_t{1});
    if (out.jumps.size() != 1) return {false, fmt("%zu jumps logged", out.jumps.size())};
    const auto& d = out.jumps[0].loss_jumps;
    const bool pass = !small && d[0] > 0.9 && d[3] > 0.9 && d[2] < 1e-6;
    return {pass, fmt("one jump at t = %.4f with Delta = (%.4f, %.3g, %.3g, %.4f)", out.jumps[0].t, d[0], d[1], d[2], d[3])};
}

Outcome no_jump_guarantee() {
    std::mt19937_64 eng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t accepted = 0, tried = 0, jumps = 0, discontinuous = 0;
    double worst_ratio = 0.0;
    while (accepted < 50 && tried < 2000) {
        ++tried;
        const std::size_t L = 1 + static_cast<std::size_t>(3.0 * unit(eng));
        MixtureSpec spec;
        for (std::size_t l = 0; l < L; ++l) {
            MixtureType t;
            t.weight = 1.0 / static_cast<double>(L);
            t.drift = PiecewiseConstant(-0.3 + 0.6 * unit(eng));
            t.vol = PiecewiseConstant(0.2 + 0.3 * unit(eng));
            t.feedback = FeedbackMap::log1p_scaled(0.05 + 0.95 * unit(eng));
            t.initial = InitialProfile::gaussian(0.4 + 0.8 * unit(eng), 0.08 + 0.12 * unit(eng));
            spec.types.push_back(t);
        }
        spec.exposures = Eigen::MatrixXd(L, L);
        for (std::size_t i = 0; i < L; ++i)
            for (std::size_t j = 0; j < L; ++j) spec.exposures(i, j) = 0.5 * unit(eng);
        spec.decay = unit(eng) < 0.5 ? DecayFn::linear_decay(1.0) : DecayFn::constant(1.0);
        spec.rho = 0.5 * unit(eng);
        MFConfig cfg;
        cfg.dx = 0.04;
        const MeanFieldModel model(spec, cfg);
        if (!model.check_smallness().pass) continue;
        ++accepted;
        const MFOutput out = model.solve(std::uint64_t{accepted});
        jumps += out.jumps.size();
        for (double inc : out.max_step_increment) {
            worst_ratio = std::max(worst_ratio, inc / out.explosion_threshold);
            discontinuous += inc < out.explosion_threshold ? 0 : 1;
        }
    }
    return {accepted == 50 && jumps == 0 && discontinuous == 0,
            fmt("%zu specs (%zu drawn), %zu jumps, max increment / threshold %.3g", accepted, tried, jumps, worst_ratio)};
}

Outcome convergence_trend() {
    ScalingConfig sc;
    sc.m_list = {4, 16, 64};
    sc.seeds_per_m = 20;
    sc.seed = 0;
    sc.common_seed = 7;

    ScalingBase plain;
    plain.blocks.core = Eigen::MatrixXd::Zero(1, 1);
    TypeDynamics single;
    single.drift = PiecewiseConstant(-0.2);
    single.vol = PiecewiseConstant(0.4);
    single.initial = InitialProfile::gaussian(0.5, 0.1);
    plain.types.push_back(single);
    plain.mf.dx = 0.02;
    plain.finite_stride = 2;
    const ScalingStudy free_study = run_scaling_study(plain, sc);

    ScalingBase weak;
    weak.blocks = fixtures::concrete_blocks();
    const double drift[4] = {-0.2, 0.0, 0.0, -0.2};
    const double mean[4] = {0.6, 0.8, 0.8, 0.6};
    for (int l = 0; l < 4; ++l) {
        TypeDynamics t;
        t.drift = PiecewiseConstant(drift[l]);
        t.vol = PiecewiseConstant(0.4);
        t.feedback = FeedbackMap::log1p_scaled(0.003);
        t.initial = InitialProfile::gaussian(mean[l], 0.15);
        weak.types.push_back(t);
    }
    weak.decay = DecayFn::linear_decay(1.0);
    weak.theta_noise = NoiseSpec::uniform(0.2, 0);
    weak.theta_nodes = 3;
    weak.rho = 0.3;
    weak.mf.dx = 0.02;
    weak.finite_stride = 2;
    const double margin = MeanFieldModel(weak.mixture(), weak.mf).check_smallness().margin;
    const ScalingStudy weak_study = run_scaling_study(weak, sc);
    bool decreasing = true;
    for (std::size_t k = 1; k < weak_study.summary.size(); ++k)
        decreasing = decreasing && weak_study.summary[k].overall_mean < weak_study.summary[k - 1].overall_mean;
    const auto& s = weak_study.summary;
    return {std::abs(free_study.loglog_slope + 0.5) <= 0.15 && decreasing && margin > 0.0,
            fmt("feedback-free slope %.3f; weak feedback (margin %.2f) means %.4f > %.4f > %.4f", free_study.loglog_slope,
                margin, s[0].overall_mean, s[1].overall_mean, s[2].overall_mean)};
}

Outcome full_vs_reduced() {
    const auto full = fixtures::core_periphery_full();
    const auto reduced = fixtures::core_periphery_reduced();
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 100; ++s) seeds.push_back(s);
    const auto report =
        compare_full_reduced(full, reduced, core_periphery_params(full), core_periphery_market(), 1.0 / 2000.0, seeds);
    return {report.median_norm_diff < 0.05 && report.agreement_rate >= 0.8,
            fmt("median normed difference %.4f, survivor agreement %.2f", report.median_norm_diff,
                report.agreement_rate)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
    std::vector<fs::path> left, right;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) left.push_back(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) right.push_back(fs::relative(e.path(), b));
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    if (left != right) return false;
    for (const auto& rel : left) {
        std::ifstream fa(a / rel, std::ios::binary), fb(b / rel, std::ios::binary);
        const std::string ca{std::istreambuf_iterator<char>(fa), {}}, cb{std::istreambuf_iterator<char>(fb), {}};
        if (ca != cb) return false;
    }
    files += left.size();
    return true;
}

Outcome determinism() {
    const fs::path configs = CONTAGION_CONFIG_DIR;
    const std::vector<std::pair<std::string, std::string>> scenarios = {
        {"reproduce-3bank", ""},
        {"reproduce-coreperiphery", ""},
        {"reproduce-heatplots", ""},
        {"simulate-finite", "simulate_finite.json"},
        {"solve-mf", "solve_mf.json"},
        {"picard", "picard.json"},
        {"scaling-study", "scaling_study.json"},
        {"full-vs-reduced", "full_vs_reduced.json"},
        {"cascade-test", "cascade_test.json"}};
    const fs::path scratch = fs::temp_directory_path() / "contagion_acceptance_determinism";
    fs::remove_all(scratch);
    std::size_t identical = 0, files = 0;
    std::string mismatch;
    for (const auto& [mode, file] : scenarios) {
        const auto document = file.empty() ? nlohmann::json::object() : cli::load_json_file(configs / file);
        const auto config = cli::parse_config(mode, document);
        cli::run(config, scratch / mode / "a");
        cli::run(config, scratch / mode / "b");
        if (same_tree(scratch / mode / "a", scratch / mode / "b", files)) {
            ++identical;
        } else {
            mismatch += " " + mode;
        }
    }
    fs::remove_all(scratch);
    return {identical == scenarios.size(),
            fmt("%zu/%zu scenarios byte-identical over %zu files%s", identical, scenarios.size(), files,
                mismatch.empty() ? "" : (", differing:" + mismatch).c_str())};
}

}  // namespace

int main() {
    set_warning_sink(quiet);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"3-bank initial capital", initial_capital},
        {"reduced-network rank", reduced_rank},
        {"effective exposure matrix", exposure_matrix},
        {"cascade-oracle equivalence", cascade_oracle},
        {"sign equivalence", sign_equivalence},
        {"mean-field conservation", conservation},
        {"feedback-free scheme accuracy", scheme_accuracy},
        {"Picard/stepper cross-validation", picard_cross},
        {"jump reproduction", jump_reproduction},
        {"no-jump guarantee", no_jump_guarantee},
        {"convergence trend", convergence_trend},
        {"full-vs-reduced", full_vs_reduced},
        {"determinism", determinism}};
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
