#pragma once

#include <cstdint>
#include <vector>

#include "contagion/finite_sim.hpp"
#include "contagion/mean_field.hpp"
#include "contagion/network.hpp"

namespace contagion {

// min over shifts h in {-H, ..., H} (grid multiples) of sup_t |a(t) - b(t + h)| + |h|,
// paths extended as constants beyond the grid. shift_horizon <= 0 selects 10 dt.
double loss_distance(const std::vector<double>& a, const std::vector<double>& b, double dt,
                     double shift_horizon = 0.0);

struct TypeDynamics {
    std::string name;
    PiecewiseConstant drift{0.0};
    PiecewiseConstant vol{1.0};
    FeedbackMap feedback = FeedbackMap::linear(0.0);
    InitialProfile initial;
};

struct ScalingBase {
    BlockSpec blocks;
    std::vector<TypeDynamics> types;  // one per atlas type
    DecayFn decay = DecayFn::constant(1.0);
    NoiseSpec theta_noise;            // law P of theta; its seed is ignored
    std::size_t theta_nodes = 1;
    double rho = 0.0;
    double horizon = 1.0;
    MFConfig mf;
    std::size_t finite_stride = 1;    // finite dt = stride * mean-field dt

    TypeAtlas atlas() const;
    MixtureSpec mixture() const;
};

struct ScalingConfig {
    std::vector<std::size_t> m_list;
    std::size_t seeds_per_m = 20;
    std::uint64_t seed = 0;
    std::uint64_t common_seed = 0;
};

struct ScalingRow {
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::vector<double> distances;  // per type
};

struct ScalingSummary {
    std::size_t m = 0;
    std::vector<double> mean;  // per type
    std::vector<double> standard_error;
    double overall_mean = 0.0;  // mean over types and seeds
    double overall_se = 0.0;
};

struct ScalingStudy {
    ScalingConfig config;
    std::vector<ScalingRow> rows;
    std::vector<ScalingSummary> summary;
    std::vector<std::vector<double>> mean_field_losses;  // [type][finite step]
    std::vector<double> grid;
    double loglog_slope = 0.0;  // of overall mean distance against m
};

// Per-type (1 + theta)-weighted empirical loss on the trajectory grid.
std::vector<std::vector<double>> empirical_type_losses(const Trajectory& traj, const TypeAtlas& atlas);

ScalingStudy run_scaling_study(const ScalingBase& base, const ScalingConfig& config);

struct FullReducedRow {
    std::uint64_t seed = 0;
    std::vector<double> full_times;
    std::vector<double> reduced_times;
    double norm_diff = 0.0;
    bool survivor_agreement = false;
    std::size_t both_defaulted = 0;
};

struct FullReducedReport {
    std::vector<FullReducedRow> rows;
    double median_norm_diff = 0.0;
    double agreement_rate = 0.0;
};

FullReducedRow compare_full_reduced_once(const LiabilityNetwork& full, const LiabilityNetwork& reduced,
                                         const std::vector<BankParams>& params, const MarketParams& market,
                                         double dt, std::uint64_t seed);

FullReducedReport compare_full_reduced(const LiabilityNetwork& full, const LiabilityNetwork& reduced,
                                       const std::vector<BankParams>& params, const MarketParams& market, double dt,
                                       const std::vector<std::uint64_t>& seeds);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace contagion
