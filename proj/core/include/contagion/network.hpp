#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace contagion {

struct PeripheryGroup {
    std::size_t size = 0;
    std::vector<double> core_to_group;  // rate owed by each core bank to one group member
    std::vector<double> group_to_core;  // rate owed by one group member to each core bank
};

struct BlockSpec {
    Eigen::MatrixXd core;  // m_c x m_c
    std::vector<PeripheryGroup> groups;
    double societal_rate = 0.0;

    std::size_t core_count() const { return static_cast<std::size_t>(core.rows()); }
    std::size_t bank_count() const;
    void validate() const;
};

struct NoiseSpec {
    enum class Kind { DiracZero, Uniform, Discrete };

    Kind kind = Kind::DiracZero;
    double half_width = 0.0;
    std::vector<double> points;
    std::vector<double> weights;
    std::uint64_t seed = 0;

    static NoiseSpec dirac_zero();
    static NoiseSpec uniform(double half_width, std::uint64_t seed);
    static NoiseSpec discrete(std::vector<double> points, std::vector<double> weights, std::uint64_t seed);

    void validate() const;
    double mean() const;
};

struct LiabilityNetwork {
    Eigen::MatrixXd rates;          // rates(i, j) = lambda_ij, money owed by i to j per unit time
    std::vector<double> societal;   // lambda_i0
    double horizon = 1.0;           // T

    std::size_t size() const { return static_cast<std::size_t>(rates.rows()); }
    void validate() const;
};

struct RankFactorization {
    std::size_t k = 0;
    Eigen::MatrixXd U;  // n x k
    Eigen::MatrixXd V;  // k x n, singular values folded in
    std::vector<double> singular_values;
    double tol = 1e-9;

    std::size_t size() const { return static_cast<std::size_t>(U.rows()); }
};

struct TypeAtlas {
    std::vector<std::size_t> labels;  // 0-based type of each bank
    std::vector<double> thetas;
    std::vector<Eigen::VectorXd> principal_u;
    std::vector<Eigen::VectorXd> principal_v;
    std::vector<double> weights;
    std::vector<std::size_t> group_sizes;  // members of each type in the base network

    std::size_t num_types() const { return weights.size(); }
    std::size_t base_size() const;
};

LiabilityNetwork build_block_matrix(const BlockSpec& spec, double horizon = 1.0);

// Entity order: m copies of the first core_count banks, then m copies of the
// remaining banks (the block-tiled layout). core_count = n0 gives copy-major order.
LiabilityNetwork scale_network(const LiabilityNetwork& base, std::size_t m);
LiabilityNetwork scale_network(const LiabilityNetwork& base, std::size_t m, std::size_t core_count);
std::vector<std::size_t> scaled_origin(std::size_t n0, std::size_t m, std::size_t core_count);

struct NoisyNetwork {
    LiabilityNetwork network;
    std::vector<double> epsilons;
    std::vector<double> deltas;
};

NoisyNetwork apply_noise(const LiabilityNetwork& net, const NoiseSpec& noise);
std::vector<double> sample_noise(const NoiseSpec& noise, std::size_t count, std::uint64_t stream);

// lambda_ij -> (1 + theta_i)(1 + theta_j) lambda_ij, the rank-preserving type noise.
LiabilityNetwork apply_type_noise(const LiabilityNetwork& net, const std::vector<double>& thetas);

double net_liability(const LiabilityNetwork& net, std::size_t i);
// All L_bar_i(T) at once, without the nonpositive-value warning.
std::vector<double> net_liabilities(const LiabilityNetwork& net);

RankFactorization rank_factorize(const LiabilityNetwork& net, double rel_tol = 1e-9);
double factorization_residual(const LiabilityNetwork& net, const RankFactorization& fac);

// Types of the base block network: one per core bank, one per nonempty group.
// Principal pairs are the factor rows/columns of a representative bank.
TypeAtlas core_periphery_atlas(const BlockSpec& spec, double rel_tol = 1e-9);

// Atlas of the m-scaled network (entity order of scale_network with the core
// block first) carrying per-bank thetas.
TypeAtlas expand_atlas(const TypeAtlas& base, std::size_t core_count, std::size_t m,
                       const std::vector<double>& thetas);

// Exact factorization of the type-noised scaled network implied by the atlas.
RankFactorization atlas_factorization(const TypeAtlas& atlas);

// Aggregate exposure of all banks of type i onto one bank of type j:
// m0 w_i w_j (u_i . v_j), rows = source type.
Eigen::MatrixXd effective_exposures(const TypeAtlas& atlas, std::size_t m0);

// Exposure per unit mass appropriate to the mean-field limit: w_i (u_i . v_j).
Eigen::MatrixXd mean_field_exposures(const TypeAtlas& atlas);

}  // namespace contagion
