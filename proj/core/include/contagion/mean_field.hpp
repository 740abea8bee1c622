#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "contagion/feedback.hpp"
#include "contagion/finite_sim.hpp"
#include "contagion/network.hpp"
#include "contagion/rng.hpp"
#include "contagion/timefn.hpp"

namespace contagion {

struct ThetaQuadrature {
    std::vector<double> nodes{0.0};
    std::vector<double> weights{1.0};

    static ThetaQuadrature dirac_zero();
    // Gauss-Legendre rule for the uniform law on (-a, a).
    static ThetaQuadrature uniform(double half_width, std::size_t count);
    static ThetaQuadrature from_noise(const NoiseSpec& noise, std::size_t count);

    double max_scale() const;  // max (1 + theta)
    void validate() const;
};

// External-asset law at t = 0 for the change of variables to distances.
struct AssetDensity {
    enum class Kind { ShiftedLognormal, Uniform };
    Kind kind = Kind::Uniform;
    double a = 0.0;  // shift, or lower end
    double b = 0.0;  // log-mean, or upper end
    double c = 0.0;  // log-sd (lognormal only)

    static AssetDensity shifted_lognormal(double shift, double log_mean, double log_sd);
    static AssetDensity uniform(double lo, double hi);
    double pdf(double y) const;
    double support_min() const;
    double quantile_upper(double tail) const;
};

// Initial distance-to-default density of one type.
struct InitialProfile {
    enum class Kind { Gaussian, Uniform, Samples, Asset };
    Kind kind = Kind::Gaussian;
    double p1 = 1.0;  // mean or lower end
    double p2 = 0.1;  // sd or upper end
    double sample_dx = 0.0;
    std::vector<double> samples;
    AssetDensity asset;
    double lambda = 1.0;       // Lambda_l for the asset form
    double mu_integral = 0.0;  // int_0^T mu for the asset form
    double horizon = 1.0;

    static InitialProfile gaussian(double mean, double sd);
    static InitialProfile uniform(double lo, double hi);
    static InitialProfile from_samples(double dx, std::vector<double> values);
    static InitialProfile from_assets(const AssetDensity& asset, double lambda, double mu_integral, double horizon);

    double support_max() const;
    // Node values on {j dx}, V(0) = 0, unnormalized.
    std::vector<double> discretize(double dx, std::size_t nodes) const;
};

// V0(x) = v0(c e^x) c e^x with c = Lambda T e^{-int mu}, on nodes {j dx}.
std::vector<double> init_density(const AssetDensity& asset, double lambda, const PiecewiseConstant& mu,
                                 double horizon, double dx, std::size_t nodes);

struct MixtureType {
    std::string name;
    double weight = 1.0;
    PiecewiseConstant drift{0.0};
    PiecewiseConstant vol{1.0};
    FeedbackMap feedback = FeedbackMap::linear(0.0);
    InitialProfile initial;
};

struct MixtureSpec {
    std::vector<MixtureType> types;
    Eigen::MatrixXd exposures;  // (i, l): exposure of type l to losses of type i
    DecayFn decay = DecayFn::constant(1.0);
    ThetaQuadrature theta;
    double rho = 0.0;
    double horizon = 1.0;

    std::size_t num_types() const { return types.size(); }
    void validate() const;
};

struct MFConfig {
    double dx = 0.01;
    double dt = 0.0;     // 0 picks the coarsest T/N (N >= 2000) meeting the stability bound
    double x_max = 0.0;  // 0 picks initial support max + 6 sigma_max sqrt(T)
    double eps0 = 1e-3;
    double eps_decay = 0.5;
    double eps_min = 1e-6;
    double inner_tol = 1e-12;
    std::size_t inner_cap = 50;
    double cascade_tol = 1e-11;
    std::size_t cascade_cap = 200000;
    double mass_tol = 1e-10;
    double explosion_threshold = 0.0;  // 0 selects 10 sqrt(dt) sigma_max max V0
    double tail_tol = 1e-6;
    std::size_t no_jump_window = 10;
    double picard_tol = 1e-10;
    std::size_t picard_cap = 200;
    std::size_t snapshot_every = 0;  // steps between density snapshots, 0 = none
    std::vector<double> snapshot_times;

    void validate() const;
};

struct DensityField {
    double t = 0.0;
    std::vector<std::vector<double>> values;  // [subtype][node]
    std::vector<double> absorbed;             // [subtype], cumulative
    std::vector<double> feedback;             // [type], int g dL
    std::vector<double> offsets;              // [type], carried common-noise remainder
};

struct CheckResult {
    bool pass = false;
    double margin = 0.0;
    std::vector<double> per_type;  // tested quantity per affected type
};

struct DecayFit {
    double beta = 1.0;
    double C_star = 0.0;
    double x_star = 0.0;
    double D_star = 0.0;
    double local_exponent = 0.0;  // log-log slope of V near 0
    bool holds = false;
};

DecayFit check_initial_decay(const std::vector<double>& V0, double dx, double beta = 1.0, double x_star = 0.0);

struct MFCascadeResult {
    bool jump = false;
    std::vector<double> jumps;                   // Delta L per type (exposure units)
    std::vector<double> eps;
    std::vector<std::vector<double>> eps_jumps;  // Delta at each eps
    std::vector<std::size_t> eps_iterations;
    std::size_t refinement_iterations = 0;
    double fixed_point_residual = 0.0;
};

struct MFJump {
    double t = 0.0;
    std::size_t step = 0;
    std::vector<double> exposure_jumps;
    std::vector<double> loss_jumps;
    MFCascadeResult cascade;
};

struct DensitySnapshot {
    double t = 0.0;
    std::vector<std::vector<double>> values;  // [type][node], theta-averaged
};

struct MFOutput {
    std::vector<double> times;
    std::vector<std::vector<double>> losses;           // [type][step], 1 - mass
    std::vector<std::vector<double>> weighted_losses;  // [type][step]
    std::vector<std::vector<double>> exposure_losses;  // [type][step], sum_i lambda_il L_i
    std::vector<double> max_conservation_error;        // [type]
    std::vector<double> max_step_increment;            // [type], continuous steps only
    std::vector<double> l2_accumulation;               // [step], sum (dL/dt)^2 dt
    std::vector<MFJump> jumps;
    std::vector<DensitySnapshot> snapshots;
    CommonNoisePath noise;
    bool exploded = false;
    double t_star = kNever;
    double explosion_threshold = 0.0;
    double dx = 0.0;
    double dt = 0.0;
};

struct StepOutcome {
    bool cascade = false;
    std::vector<double> increments;  // weighted loss increments per type
    std::vector<double> trigger_drive;  // exposure-unit contagion drive when the trigger fired
    std::size_t inner_iterations = 0;
};

struct PicardResult {
    std::vector<double> times;
    std::vector<std::vector<double>> losses;  // [type][step], weighted
    std::vector<double> residuals;
    std::size_t iterations = 0;
    bool converged = false;
};

class MeanFieldModel {
public:
    MeanFieldModel(MixtureSpec spec, MFConfig config);

    const MixtureSpec& spec() const { return spec_; }
    const MFConfig& config() const { return config_; }
    std::size_t num_types() const { return spec_.num_types(); }
    std::size_t num_thetas() const { return spec_.theta.nodes.size(); }
    std::size_t num_subtypes() const { return num_types() * num_thetas(); }
    std::size_t nodes() const { return nodes_; }
    double dx() const { return config_.dx; }
    double dt() const { return dt_; }
    std::size_t steps() const { return steps_; }
    double explosion_threshold() const { return threshold_; }
    const std::vector<double>& initial_density(std::size_t type) const { return initial_[type]; }

    DensityField initial_state() const;
    double mass(const std::vector<double>& v) const;
    std::vector<double> loss_from_density(const DensityField& state) const;
    std::vector<double> weighted_losses(const DensityField& state) const;
    std::vector<double> exposure_losses(const std::vector<double>& weighted) const;

    double theta_mf(const DensityField& state, double t, std::size_t type, std::size_t theta_index, double z) const;
    std::vector<double> xi(const DensityField& state, const std::vector<double>& z) const;

    StepOutcome step(DensityField& state, double dB0) const;
    // seed: optional lower starting point for the cascade iterates (exposure units).
    MFCascadeResult resolve_cascade(const DensityField& state, const std::vector<double>& seed = {}) const;
    std::vector<double> apply_jump(DensityField& state, const std::vector<double>& jumps) const;

    CheckResult check_no_jump(const DensityField& state, double t) const;
    CheckResult check_smallness() const;

    MFOutput solve(const CommonNoisePath& noise) const;
    MFOutput solve(std::uint64_t common_seed) const;
    PicardResult picard() const;

private:
    StepOutcome advance(DensityField& state, double dB0, bool allow_cascade) const;
    double diffuse(std::vector<double>& v, double D, double b) const;
    double shift_left(std::vector<double>& v, double amount) const;
    double shift_cells(std::vector<double>& v, long cells) const;
    double absorb_node0(std::vector<double>& v) const;
    double tail_mass(const std::vector<double>& v) const;

    MixtureSpec spec_;
    MFConfig config_;
    std::size_t nodes_ = 0;
    std::size_t steps_ = 0;
    double dt_ = 0.0;
    double threshold_ = 0.0;
    std::vector<std::vector<double>> initial_;  // [type][node], normalized
};

// Inverse-CDF draw from a piecewise-linear node density.
double sample_from_density(const std::vector<double>& v, double dx, Engine& engine);

}  // namespace contagion
