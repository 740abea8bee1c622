#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "contagion/feedback.hpp"
#include "contagion/network.hpp"
#include "contagion/timefn.hpp"

namespace contagion {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct BankParams {
    double x0 = 1.0;                         // external assets at t = 0
    PiecewiseConstant mu{0.0};
    PiecewiseConstant sigma{0.0};
};

struct MarketParams {
    double rho = 0.0;       // common-noise loading
    double recovery = 0.0;  // R2
    void validate() const;
};

struct SimConfig {
    double dt = 0.0;  // 0 selects T / 2000
    std::uint64_t seed = 0;
    std::uint64_t common_seed = 0;
    bool record_paths = true;
};

// Increments of the common Brownian motion B0 on a uniform grid.
struct CommonNoisePath {
    double dt = 0.0;
    std::vector<double> increments;

    static CommonNoisePath generate(std::uint64_t common_seed, double dt, std::size_t steps);
    double value_at(std::size_t step) const;  // B0(step * dt)
};

struct SystemState {
    double t = 0.0;
    std::vector<double> X;                   // distances to default
    std::vector<double> free;                // X + F(I): the part driven by the assets alone
    std::vector<char> alive;
    std::vector<double> losses;              // channel losses, k entries
    std::vector<double> channel_integrals;   // int g dL_l per channel
    std::vector<double> feedback_integrals;  // I_i
    std::vector<double> default_times;

    std::size_t size() const { return X.size(); }
};

struct CascadeReport {
    double t = 0.0;
    std::vector<std::vector<std::size_t>> rounds;   // nonempty rounds D^0, D^1, ...
    std::vector<std::vector<double>> round_jumps;   // Delta^m per bank, one per round
    std::vector<double> final_jumps;                // per bank
    std::vector<double> channel_jumps;              // per channel

    bool empty() const { return rounds.empty(); }
    std::vector<std::size_t> defaulted() const;
};

// A general finite particle system X = free - F_i(I_i) with channels nlambda = UV.
struct ParticleSystem {
    std::vector<double> free0;
    std::vector<PiecewiseConstant> drift;  // one per bank, or one shared
    std::vector<PiecewiseConstant> vol;
    RankFactorization channels;
    FeedbackSpec feedback;
    double rho = 0.0;
    double horizon = 1.0;

    std::size_t size() const { return free0.size(); }
    void validate() const;
};

struct Trajectory {
    std::vector<double> grid;
    std::vector<std::vector<double>> X_paths;     // [bank][step]
    std::vector<std::vector<double>> free_paths;  // [bank][step], X + F(I)
    std::vector<std::vector<double>> K_paths;  // empty unless simulated from a network
    std::vector<double> default_times;
    std::vector<int> default_rounds;           // cascade round, -1 for survivors
    std::vector<CascadeReport> cascade_reports;
    std::vector<std::vector<double>> loss_paths;  // [channel][step]
    std::uint64_t seed = 0;
    std::uint64_t common_seed = 0;
    double dt = 0.0;
};

// Mark-to-market capital. defaulted holds (tau_j, lambda_ji) for banks j with tau_j <= t.
double capital(double t, double x_t, const BankParams& params, double net_liab, double recovery, double horizon,
               const std::vector<std::pair<double, double>>& defaulted);

// Log distance to default for a bank with Lambda_i = net_liab / T > 0.
double to_distance(double x_t, double t, const BankParams& params, double net_liab, double recovery,
                   double horizon, double feedback_integral);

double theta_shift(double t, double jump, const Eigen::VectorXd& v, const SystemState& state,
                   const FeedbackMap& map, const DecayFn& decay);

double xi_map(double t, const std::vector<double>& jumps, const Eigen::VectorXd& target_v,
              const SystemState& state, const RankFactorization& fac, const FeedbackSpec& feedback);

CascadeReport resolve_cascade(const SystemState& state, const RankFactorization& fac, const FeedbackSpec& feedback);

// Exhaustive search for the smallest consistent default set using the rate
// matrix directly. Refuses more than 20 alive banks.
std::vector<std::size_t> greatest_clearing_oracle(const SystemState& state, const LiabilityNetwork& net,
                                                  const FeedbackSpec& feedback);

// Feedback maps and initial free parts of the Eisenberg-Noe distance system.
struct EisenbergNoeSystem {
    FeedbackSpec feedback;
    std::vector<double> free0;
    std::vector<double> reference;  // money scale: free = log(A / reference)
    std::vector<double> net_liab;
};
EisenbergNoeSystem eisenberg_noe_system(const LiabilityNetwork& net, const std::vector<BankParams>& params,
                                        const MarketParams& market);

Trajectory simulate_particles(const ParticleSystem& system, const SimConfig& config,
                              const CommonNoisePath* common = nullptr);

Trajectory simulate(const LiabilityNetwork& net, const std::vector<BankParams>& params, const MarketParams& market,
                    const SimConfig& config, const RankFactorization* fac = nullptr,
                    const CommonNoisePath* common = nullptr);

std::vector<std::vector<double>> empirical_losses(const Trajectory& traj, const RankFactorization& fac);

std::size_t step_count(double horizon, double dt);

}  // namespace contagion
