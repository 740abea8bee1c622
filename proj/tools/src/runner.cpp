#include "contagion_cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "contagion/convergence.hpp"
#include "contagion/errors.hpp"
#include "contagion/rng.hpp"
#include "contagion_cli/io.hpp"

namespace contagion::cli {

using nlohmann::json;

namespace {

json vec_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return a;
}

json one_based(const std::vector<std::size_t>& v) {
    json a = json::array();
    for (std::size_t x : v) a.push_back(x + 1);
    return a;
}

struct FiniteRun {
    Trajectory traj;
    RankFactorization fac;
};

FiniteRun run_finite(const LiabilityNetwork& net, const ScenarioConfig& cfg, const SimConfig& sim) {
    FiniteRun r;
    r.fac = rank_factorize(net, cfg.rank_tol);
    r.traj = simulate(net, cfg.banks, cfg.market, sim, &r.fac);
    return r;
}

void write_finite(OutputTree& tree, const std::string& prefix, const FiniteRun& run) {
    const Trajectory& tr = run.traj;
    const std::size_t n = tr.default_times.size();
    if (!tr.X_paths.empty()) {
        auto csv = tree.csv(prefix + "trajectories.csv", {"t", "bank", "X", "K", "alive"});
        for (std::size_t s = 0; s < tr.grid.size(); ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                csv.cell(tr.grid[s]).cell(i + 1).cell(tr.X_paths[i][s]);
                csv.cell(tr.K_paths.empty() ? std::nan("") : tr.K_paths[i][s]);
                csv.cell(tr.grid[s] < tr.default_times[i] ? 1 : 0);
                csv.end_row();
            }
        }
        csv.close();
    }
    {
        auto csv = tree.csv(prefix + "defaults.csv", {"bank", "tau", "cascade_round"});
        for (std::size_t i = 0; i < n; ++i) {
            csv.cell(i + 1).cell(tr.default_times[i]).cell(tr.default_rounds[i]);
            csv.end_row();
        }
        csv.close();
    }
    if (!tr.loss_paths.empty() && !tr.loss_paths[0].empty()) {
        auto csv = tree.csv(prefix + "losses.csv", {"t", "channel", "value"});
        for (std::size_t s = 0; s < tr.grid.size(); ++s) {
            for (std::size_t l = 0; l < tr.loss_paths.size(); ++l) {
                csv.cell(tr.grid[s]).cell(l + 1).cell(tr.loss_paths[l][s]);
                csv.end_row();
            }
        }
        csv.close();
    }
    json cascades = json::array();
    for (const auto& rep : tr.cascade_reports) {
        json rounds = json::array(), jumps = json::array();
        for (const auto& r : rep.rounds) rounds.push_back(one_based(r));
        for (const auto& j : rep.round_jumps) jumps.push_back(vec_json(j));
        cascades.push_back({{"t", rep.t},
                            {"rounds", rounds},
                            {"round_jumps", jumps},
                            {"final_jumps", vec_json(rep.final_jumps)},
                            {"channel_jumps", vec_json(rep.channel_jumps)}});
    }
    tree.json_file(prefix + "cascades.json", cascades);
}

std::string finite_headline(const Trajectory& tr) {
    std::size_t defaults = 0;
    for (double t : tr.default_times) defaults += t != kNever ? 1 : 0;
    std::ostringstream os;
    os << defaults << " of " << tr.default_times.size() << " banks defaulted in " << tr.cascade_reports.size()
       << " cascade events";
    return os.str();
}

std::string run_simulate(const ScenarioConfig& cfg, OutputTree& tree) {
    const FiniteRun r = run_finite(*cfg.network, cfg, cfg.sim);
    write_finite(tree, "", r);
    const auto lbar = net_liabilities(*cfg.network);
    json k0 = json::array();
    for (std::size_t i = 0; i < cfg.banks.size(); ++i)
        k0.push_back(capital(0.0, cfg.banks[i].x0, cfg.banks[i], lbar[i], cfg.market.recovery, cfg.network->horizon, {}));
    tree.json_file("summary.json", {{"banks", cfg.network->size()},
                                    {"channels", r.fac.k},
                                    {"initial_capital", k0},
                                    {"net_liabilities", vec_json(lbar)},
                                    {"default_times", vec_json(r.traj.default_times)}});
    return finite_headline(r.traj);
}

void write_comparison(OutputTree& tree, const FullReducedReport& report) {
    auto csv = tree.csv("full_vs_reduced.csv", {"seed", "norm_diff", "survivor_agreement", "both_defaulted"});
    for (const auto& row : report.rows) {
        csv.cell(row.seed).cell(row.norm_diff).cell(row.survivor_agreement ? 1 : 0).cell(row.both_defaulted);
        csv.end_row();
    }
    csv.close();
}

std::vector<std::uint64_t> seed_list(const ScenarioConfig& cfg) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t k = 0; k < cfg.seed_count; ++k) seeds.push_back(cfg.seed + k);
    return seeds;
}

std::string run_full_vs_reduced(const ScenarioConfig& cfg, OutputTree& tree) {
    const auto seeds = seed_list(cfg);
    const auto report = compare_full_reduced(*cfg.network, *cfg.reduced, cfg.banks, cfg.market, cfg.sim.dt, seeds);
    write_comparison(tree, report);
    tree.json_file("study_manifest.json", {{"seeds", seeds},
                                           {"dt", cfg.sim.dt},
                                           {"median_norm_diff", report.median_norm_diff},
                                           {"agreement_rate", report.agreement_rate},
                                           {"config", cfg.normalized}});
    std::ostringstream os;
    os << "median normed default-time difference " << report.median_norm_diff << ", survivor agreement "
       << report.agreement_rate;
    return os.str();
}

std::string run_core_periphery(const ScenarioConfig& cfg, OutputTree& tree) {
    SimConfig sim = cfg.sim;
    sim.common_seed = sim.seed;
    const FiniteRun full = run_finite(*cfg.network, cfg, sim);
    const FiniteRun reduced = run_finite(*cfg.reduced, cfg, sim);
    write_finite(tree, "full/", full);
    write_finite(tree, "reduced/", reduced);
    const FullReducedRow single =
        compare_full_reduced_once(*cfg.network, *cfg.reduced, cfg.banks, cfg.market, cfg.sim.dt, cfg.seed);
    {
        auto csv = tree.csv("default_times.csv", {"bank", "full", "reduced"});
        for (std::size_t i = 0; i < single.full_times.size(); ++i) {
            csv.cell(i + 1).cell(single.full_times[i]).cell(single.reduced_times[i]);
            csv.end_row();
        }
        csv.close();
    }
    tree.json_file("comparison.json", {{"seed", cfg.seed},
                                       {"norm_diff", single.norm_diff},
                                       {"survivor_agreement", single.survivor_agreement},
                                       {"full_rank", full.fac.k},
                                       {"reduced_rank", reduced.fac.k}});
    return run_full_vs_reduced(cfg, tree);
}

std::string run_solve_mf(const ScenarioConfig& cfg, OutputTree& tree) {
    const MeanFieldModel model(*cfg.mixture, cfg.mf);
    const MFOutput out = model.solve(cfg.common_seed);
    const std::size_t L = model.num_types();
    {
        auto csv = tree.csv("mf_losses.csv", {"t", "type", "loss"});
        for (std::size_t n = 0; n < out.times.size(); ++n) {
            for (std::size_t l = 0; l < L; ++l) {
                csv.cell(out.times[n]).cell(l + 1).cell(out.losses[l][n]);
                csv.end_row();
            }
        }
        csv.close();
    }
    json jumps = json::array();
    for (const auto& j : out.jumps) {
        json eps_jumps = json::array();
        for (const auto& e : j.cascade.eps_jumps) eps_jumps.push_back(vec_json(e));
        jumps.push_back({{"time", j.t},
                         {"step", j.step},
                         {"delta", vec_json(j.loss_jumps)},
                         {"exposure_delta", vec_json(j.exposure_jumps)},
                         {"eps", vec_json(j.cascade.eps)},
                         {"eps_jumps", eps_jumps},
                         {"eps_iterations", j.cascade.eps_iterations},
                         {"refinement_iterations", j.cascade.refinement_iterations},
                         {"fixed_point_residual", j.cascade.fixed_point_residual}});
    }
    tree.json_file("mf_jumps.json", jumps);
    if (!out.snapshots.empty()) {
        auto csv = tree.csv("mf_density.csv", {"t", "type", "x", "value"});
        for (const auto& snap : out.snapshots) {
            for (std::size_t l = 0; l < L; ++l) {
                for (std::size_t j = 0; j < snap.values[l].size(); ++j) {
                    csv.cell(snap.t).cell(l + 1).cell(static_cast<double>(j) * model.dx()).cell(snap.values[l][j]);
                    csv.end_row();
                }
            }
        }
        csv.close();
    }
    const CheckResult small = model.check_smallness();
    const CheckResult initial = model.check_no_jump(model.initial_state(), 0.0);
    json decay = json::array(), names = json::array();
    for (std::size_t l = 0; l < L; ++l) {
        const DecayFit fit = check_initial_decay(model.initial_density(l), model.dx());
        decay.push_back({{"type", l + 1},
                         {"beta", fit.beta},
                         {"C_star", fit.C_star},
                         {"x_star", fit.x_star},
                         {"D_star", fit.D_star},
                         {"local_exponent", fit.local_exponent},
                         {"holds", fit.holds}});
        names.push_back(model.spec().types[l].name);
    }
    tree.json_file("mf_checks.json",
                   {{"types", names},
                    {"smallness", {{"pass", small.pass}, {"margin", small.margin}, {"per_type", vec_json(small.per_type)}}},
                    {"no_jump_initial",
                     {{"pass", initial.pass}, {"margin", initial.margin}, {"per_type", vec_json(initial.per_type)}}},
                    {"initial_decay", decay},
                    {"max_conservation_error", vec_json(out.max_conservation_error)},
                    {"max_step_increment", vec_json(out.max_step_increment)},
                    {"explosion_threshold", out.explosion_threshold},
                    {"exploded", out.exploded},
                    {"t_star", std::isfinite(out.t_star) ? json(out.t_star) : json(nullptr)},
                    {"l2_accumulation", out.l2_accumulation.back()},
                    {"dx", out.dx},
                    {"dt", out.dt},
                    {"steps", model.steps()},
                    {"nodes", model.nodes()}});
    std::ostringstream os;
    os << L << " types, " << model.steps() << " steps, " << out.jumps.size() << " jumps";
    return os.str();
}

std::string run_picard(const ScenarioConfig& cfg, OutputTree& tree) {
    const MeanFieldModel model(*cfg.mixture, cfg.mf);
    const PicardResult res = model.picard();
    const std::size_t L = model.num_types();
    {
        auto csv = tree.csv("picard_losses.csv", {"t", "type", "loss"});
        for (std::size_t n = 0; n < res.times.size(); ++n) {
            for (std::size_t l = 0; l < L; ++l) {
                csv.cell(res.times[n]).cell(l + 1).cell(res.losses[l][n]);
                csv.end_row();
            }
        }
        csv.close();
    }
    {
        auto csv = tree.csv("picard_residuals.csv", {"iteration", "residual"});
        for (std::size_t k = 0; k < res.residuals.size(); ++k) {
            csv.cell(k + 1).cell(res.residuals[k]);
            csv.end_row();
        }
        csv.close();
    }
    const CheckResult small = model.check_smallness();
    tree.json_file("picard.json", {{"iterations", res.iterations},
                                   {"converged", res.converged},
                                   {"final_residual", res.residuals.empty() ? 0.0 : res.residuals.back()},
                                   {"smallness_margin", small.margin}});
    if (!res.converged) {
        warn("Picard iteration stopped at the cap without meeting picard_tol");
    }
    std::ostringstream os;
    os << res.iterations << " Picard iterations, final residual "
       << (res.residuals.empty() ? 0.0 : res.residuals.back());
    return os.str();
}

std::string run_scaling(const ScenarioConfig& cfg, OutputTree& tree) {
    const ScalingStudy study = run_scaling_study(*cfg.scaling, cfg.scaling_config);
    const std::size_t L = study.mean_field_losses.size();
    {
        std::vector<std::string> header = {"m", "seed"};
        for (std::size_t l = 0; l < L; ++l) header.push_back("distance_type_" + std::to_string(l + 1));
        auto csv = tree.csv("scaling_study.csv", header);
        for (const auto& row : study.rows) {
            csv.cell(row.m).cell(row.seed);
            for (double d : row.distances) csv.cell(d);
            csv.end_row();
        }
        csv.close();
    }
    {
        auto csv = tree.csv("scaling_summary.csv", {"m", "type", "mean", "standard_error"});
        for (const auto& s : study.summary) {
            for (std::size_t l = 0; l < L; ++l) {
                csv.cell(s.m).cell(std::to_string(l + 1)).cell(s.mean[l]).cell(s.standard_error[l]);
                csv.end_row();
            }
            csv.cell(s.m).cell(std::string("all")).cell(s.overall_mean).cell(s.overall_se);
            csv.end_row();
        }
        csv.close();
    }
    {
        auto csv = tree.csv("mf_reference.csv", {"t", "type", "loss"});
        for (std::size_t n = 0; n < study.grid.size(); ++n) {
            for (std::size_t l = 0; l < L; ++l) {
                csv.cell(study.grid[n]).cell(l + 1).cell(study.mean_field_losses[l][n]);
                csv.end_row();
            }
        }
        csv.close();
    }
    json runs = json::array();
    for (const auto& row : study.rows) runs.push_back({{"m", row.m}, {"seed", row.seed}});
    tree.json_file("study_manifest.json", {{"m_list", study.config.m_list},
                                           {"seeds_per_m", study.config.seeds_per_m},
                                           {"seed", study.config.seed},
                                           {"common_seed", study.config.common_seed},
                                           {"runs", runs},
                                           {"loglog_slope", study.loglog_slope},
                                           {"config", cfg.normalized}});
    std::ostringstream os;
    os << "log-log slope of mean distance against m: " << study.loglog_slope;
    return os.str();
}

// Random left-limit state with past defaults recorded through loss weights.
struct CascadeInstance {
    LiabilityNetwork net;
    RankFactorization fac;
    FeedbackSpec feedback;
    SystemState state;
};

CascadeInstance random_cascade_instance(Engine& eng, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CascadeInstance c;
    const auto N = static_cast<Eigen::Index>(n);
    c.net.rates = Eigen::MatrixXd::Zero(N, N);
    const double density = 0.2 + 0.8 * unit(eng);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            if (i != j && unit(eng) < density) c.net.rates(i, j) = 4.0 * unit(eng);
    c.net.societal.assign(n, 1.0);
    c.fac = rank_factorize(c.net);
    c.feedback.decay = DecayFn::linear_decay(1.0);
    for (std::size_t i = 0; i < n; ++i) c.feedback.maps.push_back(FeedbackMap::log1p_scaled(0.1 + 2.0 * unit(eng)));

    SystemState& s = c.state;
    s.t = 0.95 * unit(eng);
    s.alive.assign(n, 1);
    s.default_times.assign(n, kNever);
    std::vector<double> weight(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (unit(eng) < 0.2) {
            s.alive[j] = 0;
            s.default_times[j] = s.t * unit(eng);
            weight[j] = 1.0 - s.default_times[j];
        }
    }
    Eigen::VectorXd channel = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.fac.k));
    for (std::size_t j = 0; j < n; ++j)
        channel += weight[j] / static_cast<double>(n) * c.fac.U.row(static_cast<Eigen::Index>(j)).transpose();
    s.channel_integrals.assign(channel.data(), channel.data() + channel.size());
    s.losses.assign(c.fac.k, 0.0);
    s.feedback_integrals.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            s.feedback_integrals[i] += weight[j] * c.net.rates(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    s.X.resize(n);
    s.free.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.X[i] = unit(eng) < 0.3 ? 0.0 : 0.8 * unit(eng);
        s.free[i] = s.X[i] + c.feedback.maps[i](s.feedback_integrals[i]);
    }
    return c;
}

std::string run_cascade_test(const ScenarioConfig& cfg, OutputTree& tree) {
    const auto& ct = cfg.cascade_test;
    Engine eng = make_engine(cfg.seed, 0);
    std::uniform_int_distribution<std::size_t> size(ct.n_min, ct.n_max);
    std::size_t agreements = 0, cascades = 0;
    auto csv = tree.csv("cascade_test.csv", {"trial", "n", "cascade_size", "oracle_size", "agree"});
    for (std::size_t trial = 0; trial < ct.trials; ++trial) {
        const std::size_t n = size(eng);
        const CascadeInstance c = random_cascade_instance(eng, n);
        const auto resolved = resolve_cascade(c.state, c.fac, c.feedback).defaulted();
        const auto oracle = greatest_clearing_oracle(c.state, c.net, c.feedback);
        const bool agree = resolved == oracle;
        agreements += agree ? 1 : 0;
        cascades += resolved.size() > 1 ? 1 : 0;
        csv.cell(trial + 1).cell(n).cell(resolved.size()).cell(oracle.size()).cell(agree ? 1 : 0);
        csv.end_row();
    }
    csv.close();
    tree.json_file("cascade_test.json", {{"trials", ct.trials},
                                         {"agreements", agreements},
                                         {"multi_default_cascades", cascades},
                                         {"all_agree", agreements == ct.trials}});
    std::ostringstream os;
    os << agreements << " of " << ct.trials << " instances agree with the clearing oracle";
    if (agreements != ct.trials) throw NumericalError(os.str());
    return os.str();
}

}  // namespace

RunSummary run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    OutputTree tree(out_dir);
    RunSummary summary;
    const std::string& mode = cfg.mode;
    if (mode == "simulate-finite" || mode == "reproduce-3bank") {
        summary.headline = run_simulate(cfg, tree);
    } else if (mode == "full-vs-reduced") {
        summary.headline = run_full_vs_reduced(cfg, tree);
    } else if (mode == "reproduce-coreperiphery") {
        summary.headline = run_core_periphery(cfg, tree);
    } else if (mode == "solve-mf" || mode == "reproduce-heatplots") {
        summary.headline = run_solve_mf(cfg, tree);
    } else if (mode == "picard") {
        summary.headline = run_picard(cfg, tree);
    } else if (mode == "scaling-study") {
        summary.headline = run_scaling(cfg, tree);
    } else if (mode == "cascade-test") {
        summary.headline = run_cascade_test(cfg, tree);
    } else {
        throw ValidationError("unknown mode '" + mode + "'");
    }
    tree.write_manifest({{"tool", "contagion-lab"},
                         {"version", kVersion},
                         {"mode", mode},
                         {"seeds", {{"seed", cfg.seed}, {"common_seed", cfg.common_seed}}},
                         {"config", cfg.normalized}});
    summary.files = tree.file_count();
    return summary;
}

}  // namespace contagion::cli
